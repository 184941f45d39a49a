#pragma once

#include "archon/clock.hpp"
#include "archon/util.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace archon {

// ---- statement search ----------------------------------------------------------

struct StatementRecord {
    std::string id;
    std::string statement;
};

using SparseVector = std::map<std::string, double>;
using Embedding = std::function<SparseVector(std::string_view)>;

/// Lowercased alphanumeric word tokens (underscore counts as a word character).
std::vector<std::string> word_tokens(std::string_view text);

/// Raw term-frequency vector; cosine scoring normalizes it.
SparseVector term_frequency(std::string_view text);

struct SearchHit {
    std::string id;
    std::string statement;
    double score = 0.0;
};

class StatementIndex {
public:
    explicit StatementIndex(std::vector<StatementRecord> records, Embedding embedding = term_frequency);

    /// Reads one JSON object per line with fields `id` and `statement`. Blank lines are skipped.
    static StatementIndex load(const fs::path& corpus);

    /// Top min(k, size) records by cosine similarity, ties broken by identifier.
    std::vector<SearchHit> search(std::string_view query, std::size_t k) const;

    std::size_t size() const { return records_.size(); }
    const std::vector<StatementRecord>& records() const { return records_; }

private:
    struct Entry {
        SparseVector vec;
        double norm2 = 0.0;
    };
    std::vector<StatementRecord> records_;
    std::vector<Entry> entries_;
    Embedding embedding_;
};

// ---- references and routes -------------------------------------------------------

struct ReferenceDoc {
    std::string file;    // path relative to references/
    std::string source;  // original path or URL
    std::string title;
    std::string retrieved;

    bool operator==(const ReferenceDoc&) const = default;
};

void to_json(nlohmann::json& j, const ReferenceDoc& d);
void from_json(const nlohmann::json& j, ReferenceDoc& d);

std::vector<ReferenceDoc> load_manifest(const fs::path& root);

/// Copies a local file or fetches an http(s) URL into `references/` and records it in
/// `references/manifest.json`. Re-ingesting a known source returns the existing entry.
/// Throws (leaving no partial file) when the source cannot be read.
ReferenceDoc ingest_reference(const fs::path& root, const std::string& source, Clock& clock);

/// Looks a reference up by manifest title or by file name under `references/`.
std::optional<std::string> read_reference(const fs::path& root, const std::string& name);

/// Stores a candidate proof route under `routes/<obligation>/`. Returns the relative path written.
std::string record_route(const fs::path& root, const std::string& obligation, const std::string& session,
                         const std::string& text);

/// Directory-safe form of an obligation id.
std::string route_dir_name(std::string_view obligation);

}  // namespace archon
