#pragma once

#include "archon/diagnostic.hpp"
#include "archon/lexer.hpp"
#include "archon/util.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace archon {

inline constexpr std::string_view kToyExtension = ".mck";
inline constexpr std::string_view kExternalExtension = ".lean";

/// Top-level directories that hold workspace metadata rather than proof sources.
inline const std::set<std::string>& reserved_dirs() {
    static const std::set<std::string> dirs = {"references", "routes", "ledger", "spec", "checkpoints"};
    return dirs;
}

std::optional<Dialect> dialect_for_path(std::string_view path);

struct SourceFile {
    std::string path;  // workspace-relative, generic form
    std::string content;
    Dialect dialect = Dialect::toy;
    std::uint64_t version = 0;

    bool operator==(const SourceFile&) const = default;
};

enum class DeclKind { definition, theorem, import_directive };
enum class ProofState { complete, placeholder, axiom_dependent };

std::string_view to_string(DeclKind k);
std::string_view to_string(ProofState s);

struct Declaration {
    std::string name;
    DeclKind kind = DeclKind::theorem;
    std::vector<Token> statement;  // comment-free statement tokens
    std::vector<Token> proof;      // tokens after `:=` (empty for imports and bodiless declarations)
    ProofState proof_state = ProofState::complete;
    std::string file;
    Span span;
    int ordinal = 0;                         // position within the file
    std::optional<std::string> parse_error;  // set when the declaration could not be parsed

    /// Whitespace-collapsed statement token sequence; the comparison key for spec matching.
    std::string statement_text() const;
    std::vector<std::string> statement_tokens() const;
    std::string id() const { return file + "::" + name; }

    bool operator==(const Declaration&) const = default;
};

enum class ObligationStatus { open, in_progress, closed, deferred };

std::string_view to_string(ObligationStatus s);
ObligationStatus obligation_status_from_string(std::string_view s);

struct AttemptRecord {
    std::string session;
    std::string outcome;

    bool operator==(const AttemptRecord&) const = default;
};

struct Obligation {
    std::string id;  // "<file>::<declaration>"
    std::string file;
    std::string declaration;
    ObligationStatus status = ObligationStatus::open;
    std::vector<AttemptRecord> history;

    std::size_t attempts() const { return history.size(); }
    bool is_open() const { return status == ObligationStatus::open || status == ObligationStatus::in_progress; }

    bool operator==(const Obligation&) const = default;
};

std::string obligation_id(std::string_view file, std::string_view declaration);

/// Immutable snapshot of a proof workspace. Mutations produce new values.
struct ProjectState {
    std::string root;
    std::map<std::string, SourceFile> files;
    std::map<std::string, Declaration> declarations;  // keyed by Declaration::id()
    std::map<std::string, Obligation> obligations;
    std::map<std::string, std::set<std::string>> import_graph;  // importer -> imported
    std::map<std::string, std::vector<Diagnostic>> diagnostics; // per-file scan diagnostics

    std::vector<const Declaration*> declarations_in(std::string_view file) const;
    const Declaration* find_declaration(std::string_view file, std::string_view name) const;
    std::vector<const Obligation*> open_obligations() const;
    std::vector<Diagnostic> all_diagnostics() const;

    /// Files reachable from `file` through imports, excluding `file` itself.
    std::set<std::string> transitive_imports(const std::string& file) const;
    /// Files ordered so that every import precedes its importer; ties broken by path.
    std::vector<std::string> topological_files() const;

    bool operator==(const ProjectState&) const = default;
};

struct ParsedFile {
    std::vector<Declaration> declarations;  // includes import directives, in source order
    std::vector<Diagnostic> diagnostics;
};

ParsedFile parse_source(const std::string& path, std::string_view content, Dialect dialect);

/// Builds a ProjectState from files on disk. Deterministic for an unchanged tree.
ProjectState scan_project(const fs::path& root);

/// Builds a ProjectState from in-memory files (used by scan and tests).
ProjectState build_state(std::string root, std::map<std::string, SourceFile> files,
                         std::map<std::string, std::vector<Diagnostic>> io_diagnostics = {});

/// Writes every file of `state` under `root`.
void write_state(const ProjectState& state, const fs::path& root);

// ---- mutation ----------------------------------------------------------------

/// Right to mutate the files under `scope`: an exact file path, or a directory prefix ending in '/'.
struct MutationToken {
    std::string scope;
    std::string session;
    std::uint64_t serial = 0;
};

bool scope_covers(std::string_view scope, std::string_view path);
bool scopes_overlap(std::string_view a, std::string_view b);

/// Issues per-file mutation tokens. Overlapping scopes cannot be held at once.
class FileLocks {
public:
    std::optional<MutationToken> acquire(const std::string& scope, const std::string& session);
    void release(const MutationToken& token);
    bool valid_for(const MutationToken& token, std::string_view path) const;
    std::size_t held() const;

private:
    mutable std::mutex mutex_;
    std::map<std::uint64_t, MutationToken> held_;
    std::uint64_t next_serial_ = 1;
};

struct Edit {
    std::string path;
    std::string content;
    std::string session;
};

/// Replaces one file's content, bumps its version and re-derives declarations,
/// obligations and the import graph. Throws contract errors for escapes or missing tokens.
ProjectState apply_edit(const ProjectState& state, const Edit& edit, const MutationToken& token,
                        const FileLocks& locks);

// ---- partition ---------------------------------------------------------------

struct ObligationGroup {
    std::vector<std::string> files;        // every file of the connected import component
    std::vector<std::string> obligations;  // open obligation ids, sorted

    bool operator==(const ObligationGroup&) const = default;
};

/// Connected components of the undirected import graph, restricted to components
/// with open obligations; ordered by their smallest obligation id.
std::vector<ObligationGroup> dependency_partition(const ProjectState& state);

// ---- serialization -------------------------------------------------------------

nlohmann::json to_json(const ProjectState& state);

/// Thread-safe holder of the current ProjectState that persists edits to disk.
class Workspace {
public:
    Workspace(fs::path root, ProjectState state);

    const fs::path& root() const { return root_; }
    ProjectState snapshot() const;
    void replace(ProjectState state);
    FileLocks& locks() { return locks_; }

    /// apply_edit + write the file, atomically with respect to other edits.
    void edit(const Edit& edit, const MutationToken& token);

private:
    fs::path root_;
    mutable std::mutex mutex_;
    ProjectState state_;
    FileLocks locks_;
};

}  // namespace archon
