#include "archon/library.hpp"

#include "archon/error.hpp"
#include "archon/http.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace archon {

std::vector<std::string> word_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '_' || u >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

SparseVector term_frequency(std::string_view text) {
    SparseVector v;
    for (auto& w : word_tokens(text)) v[w] += 1.0;
    return v;
}

namespace {

double dot(const SparseVector& a, const SparseVector& b) {
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    double s = 0.0;
    for (const auto& [k, x] : small) {
        auto it = large.find(k);
        if (it != large.end()) s += x * it->second;
    }
    return s;
}

double norm2(const SparseVector& v) {
    double s = 0.0;
    for (const auto& [k, x] : v) s += x * x;
    return s;
}

}  // namespace

StatementIndex::StatementIndex(std::vector<StatementRecord> records, Embedding embedding)
    : records_(std::move(records)), embedding_(std::move(embedding)) {
    entries_.reserve(records_.size());
    for (const auto& r : records_) {
        Entry e{embedding_(r.statement), 0.0};
        e.norm2 = norm2(e.vec);
        entries_.push_back(std::move(e));
    }
}

StatementIndex StatementIndex::load(const fs::path& corpus) {
    std::vector<StatementRecord> records;
    std::istringstream in(read_file(corpus));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            records.push_back({j.at("id").get<std::string>(), j.at("statement").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw config_error(corpus.string() + ":" + std::to_string(lineno) + ": bad corpus record: " + e.what());
        }
    }
    return StatementIndex(std::move(records));
}

std::vector<SearchHit> StatementIndex::search(std::string_view query, std::size_t k) const {
    auto q = embedding_(query);
    double nq = norm2(q);
    if (nq == 0.0 || records_.empty() || k == 0) return {};

    struct Scored {
        std::size_t index;
        double dot;
        double norm2;
    };
    std::vector<Scored> scored;
    scored.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) scored.push_back({i, dot(q, entries_[i].vec), entries_[i].norm2});

    // Orders by dot/sqrt(norm2) without the division, so equal cosines compare equal exactly.
    auto key = [](const Scored& s) {
        if (s.norm2 == 0.0) return std::pair<int, double>{0, 0.0};
        int sign = s.dot > 0 ? 1 : (s.dot < 0 ? -1 : 0);
        return std::pair<int, double>{sign, s.dot * s.dot};
    };
    auto better = [&](const Scored& a, const Scored& b) {
        auto [sa, da] = key(a);
        auto [sb, db] = key(b);
        if (sa != sb) return sa > sb;
        if (sa != 0) {
            double lhs = da * (b.norm2 == 0.0 ? 1.0 : b.norm2);
            double rhs = db * (a.norm2 == 0.0 ? 1.0 : a.norm2);
            if (lhs != rhs) return sa > 0 ? lhs > rhs : lhs < rhs;
        }
        return records_[a.index].id < records_[b.index].id;
    };
    auto n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), better);

    std::vector<SearchHit> out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = scored[i];
        double score = s.norm2 == 0.0 ? 0.0 : s.dot / std::sqrt(nq * s.norm2);
        out.push_back({records_[s.index].id, records_[s.index].statement, score});
    }
    return out;
}

// ---- references ------------------------------------------------------------------------

void to_json(nlohmann::json& j, const ReferenceDoc& d) {
    j = {{"file", d.file}, {"source", d.source}, {"title", d.title}, {"retrieved", d.retrieved}};
}

void from_json(const nlohmann::json& j, ReferenceDoc& d) {
    d.file = j.at("file").get<std::string>();
    d.source = j.at("source").get<std::string>();
    d.title = j.value("title", "");
    d.retrieved = j.value("retrieved", "");
}

namespace {

fs::path manifest_path(const fs::path& root) { return root / "references" / "manifest.json"; }

bool is_url(std::string_view s) { return starts_with(s, "http://") || starts_with(s, "https://"); }

std::string title_of(std::string_view content, const std::string& fallback) {
    std::istringstream in{std::string(content)};
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty()) continue;
        auto start = t.find_first_not_of("# ");
        return start == std::string::npos ? fallback : t.substr(start);
    }
    return fallback;
}

std::string sanitize_file_name(std::string name) {
    for (auto& c : name) {
        auto u = static_cast<unsigned char>(c);
        if (!std::isalnum(u) && c != '.' && c != '-' && c != '_') c = '_';
    }
    if (name.empty() || name == "." || name == "..") name = "document";
    auto dot = name.rfind('.');
    auto ext = dot == std::string::npos ? "" : name.substr(dot);
    if (ext != ".md" && ext != ".txt") name += ".md";
    return name;
}

std::string base_name_of(const std::string& source) {
    if (is_url(source)) {
        auto path = source.substr(source.find("://") + 3);
        if (auto q = path.find_first_of("?#"); q != std::string::npos) path.resize(q);
        auto slash = path.find('/');
        if (slash == std::string::npos) return path;
        auto last = path.substr(path.rfind('/') + 1);
        return last.empty() ? path.substr(0, slash) : last;
    }
    return fs::path(source).filename().string();
}

void save_manifest(const fs::path& root, const std::vector<ReferenceDoc>& docs) {
    nlohmann::json j = docs;
    write_file_atomic(manifest_path(root), j.dump(2) + "\n");
}

}  // namespace

std::vector<ReferenceDoc> load_manifest(const fs::path& root) {
    auto text = try_read_file(manifest_path(root));
    if (!text) return {};
    try {
        return nlohmann::json::parse(*text).get<std::vector<ReferenceDoc>>();
    } catch (const nlohmann::json::exception& e) {
        throw infra_error("corrupt reference manifest: " + std::string(e.what()));
    }
}

ReferenceDoc ingest_reference(const fs::path& root, const std::string& source, Clock& clock) {
    auto docs = load_manifest(root);
    std::string key = is_url(source) ? source : fs::absolute(source).lexically_normal().string();
    for (const auto& d : docs) {
        if (d.source == key) return d;
    }

    std::string content;
    if (is_url(source)) {
        auto res = http_get(source, std::chrono::seconds(30));
        if (res.status < 200 || res.status >= 300) {
            throw infra_error("fetching " + source + " returned HTTP " + std::to_string(res.status));
        }
        content = std::move(res.body);
    } else {
        auto text = try_read_file(source);
        if (!text) throw not_found_error("cannot read reference source: " + source);
        content = std::move(*text);
    }

    auto refs = root / "references";
    fs::create_directories(refs);
    auto name = sanitize_file_name(base_name_of(source));
    auto stem = fs::path(name).stem().string();
    auto ext = fs::path(name).extension().string();
    for (int n = 2; fs::exists(refs / name) || name == "manifest.json"; ++n) {
        name = stem + "-" + std::to_string(n) + ext;
    }

    ReferenceDoc doc{name, key, title_of(content, stem), clock.now()};
    write_file_atomic(refs / name, content);
    docs.push_back(doc);
    save_manifest(root, docs);
    return doc;
}

std::optional<std::string> read_reference(const fs::path& root, const std::string& name) {
    for (const auto& d : load_manifest(root)) {
        if (d.title == name || d.file == name) return try_read_file(root / "references" / d.file);
    }
    auto rel = confine_relative(name);
    if (!rel || *rel == "manifest.json") return std::nullopt;
    auto path = root / "references" / *rel;
    if (!fs::is_regular_file(path)) return std::nullopt;
    return try_read_file(path);
}

std::string route_dir_name(std::string_view obligation) {
    std::string out;
    for (char c : obligation) {
        auto u = static_cast<unsigned char>(c);
        out.push_back(std::isalnum(u) || c == '.' || c == '-' || c == '_' ? c : '_');
    }
    return out.empty() ? "_" : out;
}

std::string record_route(const fs::path& root, const std::string& obligation, const std::string& session,
                         const std::string& text) {
    auto dir = fs::path("routes") / route_dir_name(obligation);
    fs::create_directories(root / dir);
    std::string base = route_dir_name(session);
    auto rel = dir / (base + ".md");
    for (int n = 2; fs::exists(root / rel); ++n) rel = dir / (base + "-" + std::to_string(n) + ".md");
    write_file_atomic(root / rel, text);
    return rel.generic_string();
}

}  // namespace archon
