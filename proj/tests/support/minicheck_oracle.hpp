#pragma once

// Random MiniCheck project generator plus an independent evaluator used as the
// oracle for the toy backend. Deliberately shares no code with src/checker.cpp.

#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace archon::testing {

struct GenExpr {
    std::string text;
    unsigned long long value = 0;
};

struct GenTheorem {
    std::string name;
    std::string statement;  // rendered "lhs = rhs"
    unsigned long long lhs = 0, rhs = 0;
    std::string proof;      // "refl" | "sorry" | "by_axiom" | "by_lemma"
    std::string arg;        // axiom or lemma name
};

struct GenProject {
    std::vector<std::set<int>> imports;          // direct imports per file
    std::vector<std::vector<GenTheorem>> files;  // theorems per file in order

    std::string path(int f) const { return "src/G" + std::to_string(f) + ".mck"; }

    std::map<std::string, std::string> render() const {
        std::map<std::string, std::string> out;
        for (std::size_t f = 0; f < files.size(); ++f) {
            std::ostringstream s;
            for (int i : imports[f]) s << "import G" << i << "\n";
            for (const auto& t : files[f]) {
                s << "theorem " << t.name << " : " << t.statement << " := " << t.proof;
                if (!t.arg.empty()) s << ' ' << t.arg;
                s << "\n";
            }
            out[path(static_cast<int>(f))] = s.str();
        }
        return out;
    }
};

class ProjectGenerator {
public:
    explicit ProjectGenerator(unsigned seed) : rng_(seed) {}

    GenProject generate(int max_decls) {
        GenProject p;
        int nfiles = 1 + pick(4);
        p.imports.resize(nfiles);
        p.files.resize(nfiles);
        for (int f = 1; f < nfiles; ++f) {
            for (int g = 0; g < f; ++g) {
                if (pick(3) == 0) p.imports[f].insert(g);
            }
        }
        int total = 1 + pick(max_decls);
        std::vector<std::pair<int, int>> all;  // (file, index) in creation order
        for (int n = 0; n < total; ++n) {
            int f = pick(nfiles);
            GenTheorem t;
            t.name = "t" + std::to_string(n);
            auto lhs = expr(2);
            unsigned long long target = lhs.value;
            int shape = pick(4);
            GenExpr rhs = shape == 0 ? GenExpr{std::to_string(target + 1 + pick(3)), target + 1}
                                     : GenExpr{std::to_string(target), target};
            if (shape == 0) rhs.value = std::stoull(rhs.text);
            t.statement = lhs.text + " = " + rhs.text;
            t.lhs = lhs.value;
            t.rhs = rhs.value;
            switch (pick(5)) {
            case 0: t.proof = "sorry"; break;
            case 1:
                t.proof = "by_axiom";
                t.arg = "Ax" + std::to_string(pick(3));
                break;
            case 2:
            case 3:
                if (!all.empty() || pick(2) == 0) {
                    t.proof = "by_lemma";
                    if (all.empty() || pick(8) == 0) {
                        t.arg = "missing" + std::to_string(pick(3));
                    } else {
                        auto [tf, ti] = all[pick(static_cast<int>(all.size()))];
                        const auto& target_thm = p.files[tf][ti];
                        t.arg = target_thm.name;
                        if (pick(4) != 0) {
                            t.statement = target_thm.statement;
                            t.lhs = target_thm.lhs;
                            t.rhs = target_thm.rhs;
                        }
                    }
                    break;
                }
                [[fallthrough]];
            default: t.proof = "refl"; break;
            }
            p.files[f].push_back(t);
            all.emplace_back(f, static_cast<int>(p.files[f].size()) - 1);
        }
        return p;
    }

private:
    int pick(int n) { return static_cast<int>(rng_() % static_cast<unsigned>(n)); }

    // expr := term ('+' term)* ; term := factor ('*' factor)* ; factor := n | '(' expr ')'
    GenExpr expr(int depth) {
        GenExpr e = term(depth);
        int extra = pick(3);
        for (int i = 0; i < extra; ++i) {
            auto t = term(depth);
            e.text += " + " + t.text;
            e.value += t.value;
        }
        return e;
    }

    GenExpr term(int depth) {
        GenExpr e = factor(depth);
        int extra = pick(2);
        for (int i = 0; i < extra; ++i) {
            auto f = factor(depth);
            e.text += " * " + f.text;
            e.value *= f.value;
        }
        return e;
    }

    GenExpr factor(int depth) {
        if (depth > 0 && pick(3) == 0) {
            auto inner = expr(depth - 1);
            return {"(" + inner.text + ")", inner.value};
        }
        unsigned long long n = static_cast<unsigned long long>(pick(12));
        return {std::to_string(n), n};
    }

    std::mt19937 rng_;
};

struct OracleVerdict {
    bool success = true;
    std::set<std::string> failing;                            // theorems with an error
    std::map<std::string, std::set<std::string>> footprint;   // closed theorems only
};

/// Naive evaluator: resolves every reference by brute-force search and computes
/// footprints by explicit graph reachability.
inline OracleVerdict oracle_check(const GenProject& p) {
    int n = static_cast<int>(p.files.size());
    // visible[f][g]: g reachable from f via imports (Floyd-Warshall style closure)
    std::vector<std::vector<bool>> visible(n, std::vector<bool>(n, false));
    for (int f = 0; f < n; ++f) {
        for (int g : p.imports[f]) visible[f][g] = true;
    }
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (visible[i][k] && visible[k][j]) visible[i][j] = true;
            }
        }
    }
    struct Node {
        std::set<std::string> axioms;
        std::vector<std::string> edges;
        bool closed = false;
    };
    std::map<std::string, Node> nodes;
    OracleVerdict v;
    for (int f = 0; f < n; ++f) {
        for (std::size_t i = 0; i < p.files[f].size(); ++i) {
            const auto& t = p.files[f][i];
            Node& node = nodes[t.name];
            bool ok = false;
            if (t.proof == "sorry") {
                continue;
            } else if (t.proof == "refl") {
                ok = t.lhs == t.rhs;
            } else if (t.proof == "by_axiom") {
                node.axioms.insert(t.arg);
                ok = true;
            } else if (t.proof == "by_lemma") {
                const GenTheorem* found = nullptr;
                for (int g = 0; g < n && !found; ++g) {
                    std::size_t limit = g == f ? i : (visible[f][g] ? p.files[g].size() : 0);
                    for (std::size_t k = 0; k < limit; ++k) {
                        if (p.files[g][k].name == t.arg) found = &p.files[g][k];
                    }
                }
                ok = found && found->statement == t.statement;
                if (ok) node.edges.push_back(found->name);
            }
            node.closed = ok;
            if (!ok) {
                v.success = false;
                v.failing.insert(t.name);
            }
        }
    }
    for (const auto& [name, node] : nodes) {
        if (!node.closed) continue;
        std::set<std::string> seen{name}, acc;
        std::vector<std::string> stack{name};
        while (!stack.empty()) {
            auto cur = stack.back();
            stack.pop_back();
            const auto& nd = nodes[cur];
            acc.insert(nd.axioms.begin(), nd.axioms.end());
            for (const auto& e : nd.edges) {
                if (seen.insert(e).second) stack.push_back(e);
            }
        }
        v.footprint[name] = acc;
    }
    return v;
}

}  // namespace archon::testing
