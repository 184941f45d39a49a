#pragma once

#include "archon/checker.hpp"
#include "archon/workspace.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace archon {

enum class HatchCategory { placeholder, axiom_intro, unsafe_feature };

std::string_view to_string(HatchCategory c);
HatchCategory hatch_category_from_string(std::string_view s);

/// Escape-hatch tokens and the category each one reports under.
using HatchLexicon = std::map<std::string, HatchCategory>;

HatchLexicon default_lexicon(Dialect dialect);

struct EscapeHatchHit {
    std::string file;
    Span span;
    std::string token;
    HatchCategory category = HatchCategory::placeholder;

    bool operator==(const EscapeHatchHit&) const = default;
};

/// Reports every lexicon token outside comments and strings, ordered by (file, span).
std::vector<EscapeHatchHit> escape_hatch_scan(const ProjectState& state, const HatchLexicon& lexicon);

struct FootprintResult {
    bool ok = true;
    std::vector<std::pair<std::string, std::string>> offending;  // (declaration, axiom), sorted
};

FootprintResult check_axiom_footprint(const CheckReport& report, const std::set<std::string>& allowed);

struct SpecMismatch {
    std::string name;
    std::vector<std::string> spec_tokens;
    std::vector<std::string> project_tokens;
    std::size_t first_divergence = 0;

    bool operator==(const SpecMismatch&) const = default;
};

struct SpecMatchReport {
    std::vector<std::pair<std::string, std::string>> matched;  // (spec name, project declaration id)
    std::vector<SpecMismatch> mismatched;
    std::vector<std::string> missing;
    std::optional<std::string> error;  // spec could not be parsed

    bool ok() const { return !error && mismatched.empty() && missing.empty(); }
};

/// Index of the first differing token, or the shorter length when one is a prefix.
std::size_t first_divergence(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Syntactic statement match between the spec file and same-named project declarations.
SpecMatchReport compare_spec(const SourceFile& spec_file, const ProjectState& state);

struct GatePolicy {
    HatchLexicon lexicon;
    std::set<std::string> allowed_axioms;
    /// When set, axiom-introduction hits are dropped from the hatch layer and the
    /// footprint check alone decides whether declared axioms are acceptable.
    bool allow_declared_axioms = false;
};

GatePolicy default_policy(Dialect dialect);

struct GateVerdict {
    bool build_ok = false;
    std::vector<EscapeHatchHit> hatch_hits;
    FootprintResult footprint;
    SpecMatchReport spec_report;
    std::vector<Diagnostic> diagnostics;  // check diagnostics plus gate infrastructure failures
    bool infrastructure_ok = true;
    bool pass = false;

    /// Names of the failing layers among {build, hatch, footprint, spec}.
    std::set<std::string> failing_checks() const;
};

/// Runs check, hatch scan, footprint policy and spec comparison. Never passes silently:
/// any infrastructure failure in a sub-step fails the verdict.
GateVerdict verify(const ProjectState& state, const CheckerConfig& checker, const std::optional<SourceFile>& spec_file,
                   const GatePolicy& policy);

/// Loads a spec file from disk, or nullopt when absent.
std::optional<SourceFile> load_spec_file(const fs::path& root, const std::string& rel_path);

nlohmann::json to_json(const GateVerdict& verdict);

/// Persists as `ledger/verdicts/<stamp>.json`.
fs::path write_verdict(const fs::path& root, const std::string& stamp, const GateVerdict& verdict);

}  // namespace archon
