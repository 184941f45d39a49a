#pragma once

#include "archon/diagnostic.hpp"
#include "archon/workspace.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace archon {

enum class Backend { toy, external };

std::string_view to_string(Backend b);
Backend backend_from_string(std::string_view s);

inline constexpr std::chrono::milliseconds kDefaultExternalTimeout{30'000};

struct CheckerConfig {
    Backend backend = Backend::toy;
    /// External backend command. `{root}` expands to the workspace root; when `{file}`
    /// is present the command runs once per source file with a per-file timeout.
    std::string command;
    /// Per-file timeout for the external backend; unbounded when unset. The toy backend ignores it.
    std::optional<std::chrono::milliseconds> timeout = kDefaultExternalTimeout;
};

using AxiomFootprint = std::map<std::string, std::set<std::string>>;

struct CheckReport {
    bool success = true;
    std::vector<Diagnostic> diagnostics;  // ordered by (file, span)
    AxiomFootprint axiom_footprint;       // declaration -> axioms it transitively relies on
    std::chrono::milliseconds elapsed{0};

    std::size_t count(Severity s) const;
    std::size_t count(DiagnosticKind k) const;
};

CheckReport check(const ProjectState& state, const CheckerConfig& config);

/// Parses line-oriented checker output. Recognized forms:
///   `SEV file:line:col-line:col message`   (documented adapter format)
///   `file:line:col: SEV: message`          (native compiler format)
///   `'decl' depends on axioms: [a, b]` / `'decl' does not depend on any axioms`
/// Axiom lines are consumed by `parse_external_footprint`; any other line becomes an
/// info diagnostic on the synthetic path `<output>`.
std::vector<Diagnostic> parse_external_output(std::string_view raw);
AxiomFootprint parse_external_footprint(std::string_view raw);

inline constexpr std::string_view kSyntheticOutputPath = "<output>";
inline constexpr std::string_view kBackendPath = "<backend>";

// ---- MiniCheck arithmetic ------------------------------------------------------

struct Equation {
    std::uint64_t lhs = 0;
    std::uint64_t rhs = 0;
};

/// Evaluates a ground equation `e = e` over `+`, `*`, parentheses and naturals.
/// Returns an error message on malformed input or 64-bit overflow.
std::variant<Equation, std::string> evaluate_statement(const std::vector<Token>& tokens);

nlohmann::json to_json(const CheckReport& report, bool include_elapsed = true);

/// Stores the report as `ledger/checks/<name>.json`.
fs::path write_check_report(const fs::path& root, const std::string& name, const CheckReport& report);

}  // namespace archon
