#include "archon/checker.hpp"

#include "archon/error.hpp"
#include "archon/subprocess.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <regex>
#include <sstream>

namespace archon {

std::string_view to_string(Backend b) { return b == Backend::toy ? "toy" : "external"; }

Backend backend_from_string(std::string_view s) {
    if (s == "toy") return Backend::toy;
    if (s == "external") return Backend::external;
    throw config_error("unknown checker backend '" + std::string(s) + "'");
}

std::size_t CheckReport::count(Severity s) const {
    return std::count_if(diagnostics.begin(), diagnostics.end(), [&](const auto& d) { return d.severity == s; });
}

std::size_t CheckReport::count(DiagnosticKind k) const {
    return std::count_if(diagnostics.begin(), diagnostics.end(), [&](const auto& d) { return d.kind == k; });
}

// ---- arithmetic ----------------------------------------------------------------------

namespace {

class ExprParser {
public:
    explicit ExprParser(const std::vector<Token>& toks) : t_(toks) {}

    std::variant<Equation, std::string> equation() {
        try {
            Equation eq;
            eq.lhs = sum();
            if (!peek("=")) fail("expected '='");
            ++i_;
            eq.rhs = sum();
            if (i_ != t_.size()) fail("unexpected token '" + t_[i_].text + "'");
            return eq;
        } catch (const std::string& why) {
            return why;
        }
    }

private:
    bool peek(std::string_view s) const { return i_ < t_.size() && t_[i_].is(s); }
    [[noreturn]] void fail(std::string why) { throw why; }

    std::uint64_t sum() {
        std::uint64_t v = product();
        while (peek("+")) {
            ++i_;
            std::uint64_t r = product();
            if (v > std::numeric_limits<std::uint64_t>::max() - r) fail("arithmetic overflow");
            v += r;
        }
        return v;
    }

    std::uint64_t product() {
        std::uint64_t v = atom();
        while (peek("*")) {
            ++i_;
            std::uint64_t r = atom();
            if (r != 0 && v > std::numeric_limits<std::uint64_t>::max() / r) fail("arithmetic overflow");
            v *= r;
        }
        return v;
    }

    std::uint64_t atom() {
        if (i_ >= t_.size()) fail("unexpected end of statement");
        const Token& tok = t_[i_];
        if (tok.is("(")) {
            ++i_;
            std::uint64_t v = sum();
            if (!peek(")")) fail("expected ')'");
            ++i_;
            return v;
        }
        if (tok.kind == TokenKind::number) {
            ++i_;
            std::uint64_t v = 0;
            for (char c : tok.text) {
                std::uint64_t d = static_cast<std::uint64_t>(c - '0');
                if (v > (std::numeric_limits<std::uint64_t>::max() - d) / 10) fail("arithmetic overflow");
                v = v * 10 + d;
            }
            return v;
        }
        fail("unexpected token '" + tok.text + "'");
    }

    const std::vector<Token>& t_;
    std::size_t i_ = 0;
};

}  // namespace

std::variant<Equation, std::string> evaluate_statement(const std::vector<Token>& tokens) {
    return ExprParser(tokens).equation();
}

// ---- toy backend ---------------------------------------------------------------------------

namespace {

struct NodeInfo {
    std::set<std::string> own_axioms;
    std::vector<std::string> refs;  // declaration ids referenced through by_lemma
    bool closed = false;            // checked without error and without placeholder
};

std::string footprint_key(const Declaration& d, const std::map<std::string, int>& name_counts) {
    return name_counts.at(d.name) > 1 ? d.id() : d.name;
}

CheckReport check_toy(const ProjectState& state) {
    CheckReport report;
    auto& diags = report.diagnostics;
    for (const auto& d : state.all_diagnostics()) diags.push_back(d);

    std::map<std::string, NodeInfo> nodes;
    std::map<std::string, int> name_counts;
    for (const auto& [id, d] : state.declarations) {
        if (d.kind != DeclKind::import_directive) ++name_counts[d.name];
    }

    auto add = [&](const Declaration& d, Severity sev, DiagnosticKind kind, std::string msg) {
        diags.push_back({d.file, d.span, sev, kind, d.name + ": " + msg});
    };

    for (const auto& file : state.topological_files()) {
        if (state.files.at(file).dialect != Dialect::toy) {
            diags.push_back({file, {}, Severity::error, DiagnosticKind::backend_failure,
                             "toy backend cannot check external-dialect file"});
            continue;
        }
        auto visible = state.transitive_imports(file);
        for (const auto* decl : state.declarations_in(file)) {
            const auto& d = *decl;
            if (d.kind == DeclKind::import_directive || d.parse_error) continue;
            NodeInfo& node = nodes[d.id()];
            bool placeholder = d.proof_state == ProofState::placeholder;
            if (placeholder) {
                Span at = d.span;
                for (const auto& t : d.proof)
                    if (t.is("sorry")) {
                        at = t.span;
                        break;
                    }
                diags.push_back({d.file, at, Severity::warning, DiagnosticKind::placeholder, d.name + ": declaration uses 'sorry'"});
            }

            if (d.kind == DeclKind::definition) {
                node.closed = !placeholder;
                continue;
            }

            auto eq = evaluate_statement(d.statement);
            if (auto* why = std::get_if<std::string>(&eq)) {
                add(d, Severity::error, *why == "arithmetic overflow" ? DiagnosticKind::proof_failure : DiagnosticKind::parse,
                    "statement is not a ground equation: " + *why);
                continue;
            }
            const auto& e = std::get<Equation>(eq);
            const auto& p = d.proof;
            bool ok = false;

            if (p.size() == 1 && p[0].is("sorry")) {
                continue;
            } else if (p.size() == 1 && p[0].is("refl")) {
                ok = e.lhs == e.rhs;
                if (!ok) {
                    add(d, Severity::error, DiagnosticKind::proof_failure,
                        "refl failed: left side is " + std::to_string(e.lhs) + ", right side is " + std::to_string(e.rhs));
                }
            } else if (p.size() == 2 && p[0].is("by_axiom") && p[1].kind == TokenKind::identifier) {
                node.own_axioms.insert(p[1].text);
                ok = true;
            } else if (p.size() == 2 && p[0].is("by_lemma") && p[1].kind == TokenKind::identifier) {
                const std::string& target = p[1].text;
                std::vector<const Declaration*> found;
                if (auto* local = state.find_declaration(file, target);
                    local && local->ordinal < d.ordinal && local->kind == DeclKind::theorem) {
                    found.push_back(local);
                } else {
                    for (const auto& imported : visible) {
                        auto* cand = state.find_declaration(imported, target);
                        if (cand && cand->kind == DeclKind::theorem) found.push_back(cand);
                    }
                }
                if (found.empty()) {
                    add(d, Severity::error, DiagnosticKind::unknown_reference,
                        "unknown lemma '" + target + "' (must precede in import order)");
                } else if (found.size() > 1) {
                    add(d, Severity::error, DiagnosticKind::unknown_reference, "ambiguous lemma '" + target + "'");
                } else if (found[0]->statement_text() != d.statement_text()) {
                    add(d, Severity::error, DiagnosticKind::proof_failure,
                        "lemma '" + target + "' states '" + found[0]->statement_text() + "'");
                } else {
                    node.refs.push_back(found[0]->id());
                    ok = true;
                }
            } else if (p.size() == 1 && p[0].is("unsafe_eval")) {
                add(d, Severity::warning, DiagnosticKind::proof_failure, "unsafe_eval accepted without checking");
                ok = true;
            } else if (!placeholder) {
                add(d, Severity::error, DiagnosticKind::parse, "unrecognized proof form");
            }
            node.closed = ok && !placeholder;
        }
    }

    // Footprint: union of own axioms over everything reachable through by_lemma edges.
    std::map<std::string, std::set<std::string>> memo;
    std::function<const std::set<std::string>&(const std::string&)> reach = [&](const std::string& id)
        -> const std::set<std::string>& {
        if (auto it = memo.find(id); it != memo.end()) return it->second;
        std::set<std::string> acc;
        if (auto it = nodes.find(id); it != nodes.end()) {
            acc = it->second.own_axioms;
            for (const auto& r : it->second.refs) {
                const auto& sub = reach(r);
                acc.insert(sub.begin(), sub.end());
            }
        }
        return memo[id] = std::move(acc);
    };
    for (const auto& [id, node] : nodes) {
        if (!node.closed) continue;
        const auto& d = state.declarations.at(id);
        report.axiom_footprint[footprint_key(d, name_counts)] = reach(id);
    }
    return report;
}

// ---- external backend -----------------------------------------------------------------------

std::string replace_all(std::string s, std::string_view what, const std::string& with) {
    for (std::size_t pos = 0; (pos = s.find(what, pos)) != std::string::npos; pos += with.size()) {
        s.replace(pos, what.size(), with);
    }
    return s;
}

DiagnosticKind infer_kind(Severity sev, const std::string& msg) {
    if (msg.find("sorry") != std::string::npos) return DiagnosticKind::placeholder;
    if (msg.find("unknown identifier") != std::string::npos || msg.find("unknown constant") != std::string::npos ||
        msg.find("unknown module") != std::string::npos) {
        return DiagnosticKind::unknown_reference;
    }
    if (msg.find("timeout") != std::string::npos) return DiagnosticKind::timeout;
    if (msg.rfind("unexpected", 0) == 0 || msg.rfind("expected", 0) == 0) return DiagnosticKind::parse;
    (void)sev;
    return DiagnosticKind::proof_failure;
}

const std::regex& adapter_line() {
    static const std::regex re(R"(^(error|warning|info)\s+(\S+):(\d+):(\d+)-(\d+):(\d+)\s*(.*)$)");
    return re;
}

const std::regex& native_line() {
    static const std::regex re(R"(^(\S+?):(\d+):(\d+):\s*(error|warning|info):\s*(.*)$)");
    return re;
}

const std::regex& axioms_line() {
    static const std::regex re(R"(^'([^']+)' depends on axioms:\s*\[(.*)\]\s*$)");
    return re;
}

const std::regex& no_axioms_line() {
    static const std::regex re(R"(^'([^']+)' does not depend on any axioms\s*$)");
    return re;
}

bool is_axiom_line(const std::string& line) {
    return std::regex_match(line, axioms_line()) || std::regex_match(line, no_axioms_line());
}

std::vector<std::string> lines_of(std::string_view raw) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in{std::string(raw)};
    while (std::getline(in, cur)) {
        if (!cur.empty() && cur.back() == '\r') cur.pop_back();
        out.push_back(cur);
    }
    return out;
}

}  // namespace

std::vector<Diagnostic> parse_external_output(std::string_view raw) {
    std::vector<Diagnostic> out;
    int lineno = 0;
    for (const auto& line : lines_of(raw)) {
        ++lineno;
        if (trim(line).empty() || is_axiom_line(line)) continue;
        std::smatch m;
        if (std::regex_match(line, m, adapter_line())) {
            auto sev = severity_from_string(m[1].str());
            Span span{{std::stoi(m[3]), std::stoi(m[4])}, {std::stoi(m[5]), std::stoi(m[6])}};
            std::string msg = m[7].str();
            out.push_back({m[2].str(), span, sev, infer_kind(sev, msg), msg});
        } else if (std::regex_match(line, m, native_line())) {
            auto sev = severity_from_string(m[4].str());
            Position at{std::stoi(m[2]), std::stoi(m[3])};
            std::string msg = m[5].str();
            out.push_back({m[1].str(), {at, at}, sev, infer_kind(sev, msg), msg});
        } else {
            out.push_back({std::string(kSyntheticOutputPath), {{lineno, 1}, {lineno, 1}}, Severity::info,
                           DiagnosticKind::backend_failure, line});
        }
    }
    return out;
}

AxiomFootprint parse_external_footprint(std::string_view raw) {
    AxiomFootprint fp;
    for (const auto& line : lines_of(raw)) {
        std::smatch m;
        if (std::regex_match(line, m, axioms_line())) {
            auto& set = fp[m[1].str()];
            std::string list = m[2].str();
            std::size_t b = 0;
            while (b <= list.size()) {
                auto e = list.find(',', b);
                if (e == std::string::npos) e = list.size();
                auto name = trim(std::string_view(list).substr(b, e - b));
                if (!name.empty()) set.insert(name);
                b = e + 1;
            }
        } else if (std::regex_match(line, m, no_axioms_line())) {
            fp[m[1].str()];
        }
    }
    return fp;
}

namespace {

void absorb(CheckReport& report, const ProcessResult& run, const std::string& timeout_file) {
    if (run.timed_out) {
        report.diagnostics.push_back({timeout_file, {}, Severity::error, DiagnosticKind::timeout, "checker timed out"});
        return;
    }
    auto diags = parse_external_output(run.output);
    auto fp = parse_external_footprint(run.output);
    bool recognized = !fp.empty() || std::any_of(diags.begin(), diags.end(), [](const auto& d) {
        return d.file != kSyntheticOutputPath;
    });
    bool has_error = std::any_of(diags.begin(), diags.end(), [](const auto& d) { return d.severity == Severity::error; });
    if (run.exit_code != 0 && !recognized) {
        report.diagnostics.push_back({std::string(kBackendPath), {}, Severity::error, DiagnosticKind::backend_failure,
                                      "checker exited with status " + std::to_string(run.exit_code) +
                                          " and unrecognized output"});
        return;
    }
    report.diagnostics.insert(report.diagnostics.end(), diags.begin(), diags.end());
    if (run.exit_code != 0 && !has_error) {
        report.diagnostics.push_back({std::string(kBackendPath), {}, Severity::error, DiagnosticKind::backend_failure,
                                      "checker exited with status " + std::to_string(run.exit_code)});
    }
    for (auto& [k, v] : fp) report.axiom_footprint[k].insert(v.begin(), v.end());
}

CheckReport check_external(const ProjectState& state, const CheckerConfig& config) {
    if (trim(config.command).empty()) throw config_error("external backend requires a command template");
    CheckReport report;
    fs::path root = state.root;
    std::string cmd = replace_all(config.command, "{root}", shell_quote(state.root));
    if (cmd.find("{file}") != std::string::npos) {
        for (const auto& file : state.topological_files()) {
            auto run = run_command(replace_all(cmd, "{file}", shell_quote(file)), root, config.timeout);
            absorb(report, run, file);
        }
    } else {
        absorb(report, run_command(cmd, root, config.timeout), std::string(kBackendPath));
    }
    return report;
}

}  // namespace

CheckReport check(const ProjectState& state, const CheckerConfig& config) {
    auto started = std::chrono::steady_clock::now();
    CheckReport report = config.backend == Backend::toy ? check_toy(state) : check_external(state, config);
    std::stable_sort(report.diagnostics.begin(), report.diagnostics.end(), diagnostic_less);
    report.success = std::none_of(report.diagnostics.begin(), report.diagnostics.end(),
                                  [](const auto& d) { return d.severity == Severity::error; });
    report.elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    return report;
}

nlohmann::json to_json(const CheckReport& report, bool include_elapsed) {
    nlohmann::json fp = nlohmann::json::object();
    for (const auto& [k, v] : report.axiom_footprint) fp[k] = v;
    nlohmann::json j = {{"success", report.success}, {"diagnostics", report.diagnostics}, {"axiom_footprint", fp}};
    if (include_elapsed) j["elapsed_ms"] = report.elapsed.count();
    return j;
}

fs::path write_check_report(const fs::path& root, const std::string& name, const CheckReport& report) {
    fs::path path = root / "ledger" / "checks" / (name + ".json");
    write_file_atomic(path, to_json(report).dump(2) + "\n");
    return path;
}

}  // namespace archon
