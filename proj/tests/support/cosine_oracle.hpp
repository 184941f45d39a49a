#pragma once

#include "archon/library.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace archon::testing {

// Independent ranking oracle: integer term counts, exact comparison of cosines through
// cross-multiplied squares in 128-bit arithmetic.
inline std::map<std::string, long long> counts(const std::string& text) {
    std::map<std::string, long long> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) ++out[cur];
        cur.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

struct Exact {
    long long dot = 0;
    long long norm2 = 0;
};

// a.dot/sqrt(a.norm2) > b.dot/sqrt(b.norm2), with the query norm cancelling out.
inline int compare(const Exact& a, const Exact& b) {
    auto sgn = [](long long x) { return (x > 0) - (x < 0); };
    auto side = [&](const Exact& x, const Exact& y) -> __int128 {
        if (x.norm2 == 0) return 0;
        return static_cast<__int128>(sgn(x.dot)) * x.dot * x.dot * (y.norm2 == 0 ? 1 : y.norm2);
    };
    if (a.norm2 == 0 && b.norm2 == 0) return 0;
    if (a.norm2 == 0) return b.dot > 0 ? -1 : (b.dot < 0 ? 1 : 0);
    if (b.norm2 == 0) return a.dot > 0 ? 1 : (a.dot < 0 ? -1 : 0);
    auto l = side(a, b), r = side(b, a);
    return (l > r) - (l < r);
}

inline std::vector<std::string> oracle_top(const std::vector<StatementRecord>& recs, const std::string& query, std::size_t k) {
    auto q = counts(query);
    std::vector<std::pair<Exact, std::string>> scored;
    for (const auto& r : recs) {
        auto d = counts(r.statement);
        Exact e;
        for (const auto& [w, n] : d) {
            e.norm2 += n * n;
            auto it = q.find(w);
            if (it != q.end()) e.dot += n * it->second;
        }
        if (q.empty()) e.dot = 0;
        scored.push_back({e, r.id});
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        int c = compare(a.first, b.first);
        if (c != 0) return c > 0;
        return a.second < b.second;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(scored[i].second);
    return out;
}

inline std::vector<StatementRecord> random_corpus(std::mt19937& rng, std::size_t n) {
    static const std::vector<std::string> vocab{"ring", "ideal", "prime", "local", "complete", "module", "flat",
                                                "fiber", "generic", "noetherian", "quasi", "dimension", "map",
                                                "field", "regular", "henselian", "adic", "formal", "extension"};
    std::uniform_int_distribution<std::size_t> len(1, 9), pick(0, vocab.size() - 1);
    std::vector<StatementRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string s;
        auto l = len(rng);
        for (std::size_t j = 0; j < l; ++j) s += (j ? " " : "") + vocab[pick(rng)];
        auto num = std::to_string((i * 37) % n);
        out.push_back({"stmt_" + std::string(3 - std::min<std::size_t>(3, num.size()), '0') + num, s});
    }
    return out;
}


}  // namespace archon::testing
