#include "archon/gate.hpp"

#include "archon/error.hpp"

#include <algorithm>

namespace archon {

std::string_view to_string(HatchCategory c) {
    switch (c) {
    case HatchCategory::placeholder: return "placeholder";
    case HatchCategory::axiom_intro: return "axiom_intro";
    case HatchCategory::unsafe_feature: return "unsafe_feature";
    }
    return "placeholder";
}

HatchCategory hatch_category_from_string(std::string_view s) {
    for (auto c : {HatchCategory::placeholder, HatchCategory::axiom_intro, HatchCategory::unsafe_feature}) {
        if (to_string(c) == s) return c;
    }
    throw config_error("unknown hatch category '" + std::string(s) + "'");
}

HatchLexicon default_lexicon(Dialect dialect) {
    if (dialect == Dialect::toy) {
        return {{"sorry", HatchCategory::placeholder},
                {"by_axiom", HatchCategory::axiom_intro},
                {"unsafe_eval", HatchCategory::unsafe_feature}};
    }
    return {{"sorry", HatchCategory::placeholder},
            {"sorryAx", HatchCategory::placeholder},
            {"admit", HatchCategory::placeholder},
            {"axiom", HatchCategory::axiom_intro},
            {"unsafe", HatchCategory::unsafe_feature}};
}

GatePolicy default_policy(Dialect dialect) {
    GatePolicy p;
    p.lexicon = default_lexicon(dialect);
    if (dialect == Dialect::external) p.allowed_axioms = {"propext", "Classical.choice", "Quot.sound"};
    return p;
}

std::vector<EscapeHatchHit> escape_hatch_scan(const ProjectState& state, const HatchLexicon& lexicon) {
    std::vector<EscapeHatchHit> hits;
    for (const auto& [path, f] : state.files) {
        auto lexed = lex(f.content, f.dialect);
        for (const auto& tok : lexed.tokens) {
            if (tok.kind != TokenKind::identifier) continue;
            auto it = lexicon.find(tok.text);
            if (it != lexicon.end()) hits.push_back({path, tok.span, tok.text, it->second});
        }
    }
    std::sort(hits.begin(), hits.end(),
              [](const auto& a, const auto& b) { return std::tie(a.file, a.span) < std::tie(b.file, b.span); });
    return hits;
}

FootprintResult check_axiom_footprint(const CheckReport& report, const std::set<std::string>& allowed) {
    FootprintResult r;
    for (const auto& [decl, axioms] : report.axiom_footprint) {
        for (const auto& ax : axioms) {
            if (!allowed.count(ax)) r.offending.emplace_back(decl, ax);
        }
    }
    std::sort(r.offending.begin(), r.offending.end());
    r.ok = r.offending.empty();
    return r;
}

std::size_t first_divergence(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] != b[i]) return i;
    }
    return n;
}

SpecMatchReport compare_spec(const SourceFile& spec_file, const ProjectState& state) {
    SpecMatchReport report;
    auto parsed = parse_source(spec_file.path, spec_file.content, spec_file.dialect);
    for (const auto& d : parsed.diagnostics) {
        if (d.severity == Severity::error) {
            report.error = "spec " + spec_file.path + ":" + std::to_string(d.span.start.line) + ": " + d.message;
            return report;
        }
    }
    // Project declarations by name; the first file in path order wins.
    std::map<std::string, const Declaration*> by_name;
    for (const auto& [id, d] : state.declarations) {
        if (d.kind == DeclKind::import_directive) continue;
        by_name.emplace(d.name, &d);
    }
    for (const auto& sd : parsed.declarations) {
        if (sd.kind == DeclKind::import_directive) continue;
        auto it = by_name.find(sd.name);
        if (it == by_name.end()) {
            report.missing.push_back(sd.name);
            continue;
        }
        auto spec_toks = sd.statement_tokens();
        auto proj_toks = it->second->statement_tokens();
        if (spec_toks == proj_toks) {
            report.matched.emplace_back(sd.name, it->second->id());
        } else {
            report.mismatched.push_back({sd.name, spec_toks, proj_toks, first_divergence(spec_toks, proj_toks)});
        }
    }
    return report;
}

std::set<std::string> GateVerdict::failing_checks() const {
    std::set<std::string> out;
    if (!build_ok) out.insert("build");
    if (!hatch_hits.empty()) out.insert("hatch");
    if (!footprint.ok) out.insert("footprint");
    if (!spec_report.ok()) out.insert("spec");
    return out;
}

GateVerdict verify(const ProjectState& state, const CheckerConfig& checker, const std::optional<SourceFile>& spec_file,
                   const GatePolicy& policy) {
    GateVerdict v;
    try {
        auto report = check(state, checker);
        v.build_ok = report.success;
        v.diagnostics = report.diagnostics;
        v.footprint = check_axiom_footprint(report, policy.allowed_axioms);
    } catch (const std::exception& e) {
        v.infrastructure_ok = false;
        v.build_ok = false;
        v.diagnostics.push_back({std::string(kBackendPath), {}, Severity::error, DiagnosticKind::backend_failure,
                                 std::string("check failed: ") + e.what()});
    }

    for (auto& hit : escape_hatch_scan(state, policy.lexicon)) {
        if (policy.allow_declared_axioms && hit.category == HatchCategory::axiom_intro) continue;
        v.hatch_hits.push_back(std::move(hit));
    }

    if (!spec_file) {
        v.spec_report.error = "spec file missing";
    } else {
        v.spec_report = compare_spec(*spec_file, state);
    }
    if (v.spec_report.error) {
        v.diagnostics.push_back({spec_file ? spec_file->path : std::string("spec"), {}, Severity::error,
                                 DiagnosticKind::parse, *v.spec_report.error});
    }

    v.pass = v.infrastructure_ok && v.build_ok && v.hatch_hits.empty() && v.footprint.ok && v.spec_report.ok();
    return v;
}

std::optional<SourceFile> load_spec_file(const fs::path& root, const std::string& rel_path) {
    auto content = try_read_file(root / rel_path);
    if (!content) return std::nullopt;
    auto dialect = dialect_for_path(rel_path).value_or(Dialect::toy);
    return SourceFile{rel_path, std::move(*content), dialect, 0};
}

nlohmann::json to_json(const GateVerdict& v) {
    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : v.hatch_hits) {
        hits.push_back({{"file", h.file}, {"span", h.span}, {"token", h.token}, {"category", to_string(h.category)}});
    }
    nlohmann::json offending = nlohmann::json::array();
    for (const auto& [d, a] : v.footprint.offending) offending.push_back({{"declaration", d}, {"axiom", a}});
    nlohmann::json matched = nlohmann::json::array();
    for (const auto& [s, p] : v.spec_report.matched) matched.push_back({{"spec", s}, {"project", p}});
    nlohmann::json mismatched = nlohmann::json::array();
    for (const auto& m : v.spec_report.mismatched) {
        mismatched.push_back({{"name", m.name},
                              {"spec_tokens", m.spec_tokens},
                              {"project_tokens", m.project_tokens},
                              {"first_divergence", m.first_divergence}});
    }
    nlohmann::json spec = {{"matched", matched}, {"mismatched", mismatched}, {"missing", v.spec_report.missing}};
    if (v.spec_report.error) spec["error"] = *v.spec_report.error;
    return {{"pass", v.pass},
            {"build_ok", v.build_ok},
            {"hatch_hits", hits},
            {"footprint_ok", v.footprint.ok},
            {"footprint_offending", offending},
            {"spec_report", spec},
            {"infrastructure_ok", v.infrastructure_ok},
            {"failing_checks", v.failing_checks()},
            {"diagnostics", v.diagnostics}};
}

fs::path write_verdict(const fs::path& root, const std::string& stamp, const GateVerdict& verdict) {
    fs::path path = root / "ledger" / "verdicts" / (stamp + ".json");
    write_file_atomic(path, to_json(verdict).dump(2) + "\n");
    return path;
}

}  // namespace archon
