#include "archon/cli.hpp"

#include "archon/checkpoint.hpp"
#include "archon/ledger.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

namespace archon {

int exit_code_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::config:
    case ErrorKind::contract:
    case ErrorKind::not_found: return kExitConfig;
    case ErrorKind::infrastructure: return kExitInfra;
    }
    return kExitInfra;
}

fs::path templates_dir() {
    if (const char* env = std::getenv("ARCHON_TEMPLATES")) return env;
    return ARCHON_FIXTURES_DIR;
}

namespace {

const char* kStarterSkill = R"(---
name: project-conventions
trigger: editing files in this project
---
Keep one obligation per theorem. Prefer reusing an existing lemma over re-proving
the same statement. Record alternative routes with record_route before abandoning them.
)";

const char* kEmptySpec = R"(-- Statement specification. Add the target theorem here with a `sorry` proof;
-- the gate checks that the project proves exactly this statement.
)";

std::string verdict_text(const GateVerdict& v) {
    std::ostringstream out;
    out << "gate: " << (v.pass ? "PASS" : "FAIL") << "\n";
    out << "  build:     " << (v.build_ok && v.infrastructure_ok ? "ok" : "failed") << "\n";
    out << "  hatch:     " << v.hatch_hits.size() << " hit(s)\n";
    for (const auto& h : v.hatch_hits) {
        out << "    " << h.file << ":" << h.span.start.line << ":" << h.span.start.col << " " << h.token << " ("
            << to_string(h.category) << ")\n";
    }
    out << "  footprint: " << (v.footprint.ok ? "ok" : "disallowed axioms") << "\n";
    for (const auto& [decl, ax] : v.footprint.offending) out << "    " << decl << " uses " << ax << "\n";
    out << "  spec:      " << (v.spec_report.ok() ? "ok" : "mismatch") << "\n";
    if (v.spec_report.error) out << "    " << *v.spec_report.error << "\n";
    for (const auto& m : v.spec_report.mismatched) {
        out << "    " << m.name << " differs at token " << m.first_divergence << "\n";
    }
    for (const auto& m : v.spec_report.missing) out << "    " << m << " missing from project\n";
    for (const auto& d : v.diagnostics) {
        if (d.severity == Severity::error) out << "  " << d.file << ":" << d.span.start.line << ": " << d.message << "\n";
    }
    return out.str();
}

std::string status_text(const json& s) {
    std::ostringstream out;
    out << "phase: " << (s["phase"].is_null() ? std::string("(not started)") : s["phase"].get<std::string>()) << "\n";
    out << "sessions: " << s["sessions"].get<std::size_t>() << ", plan cycles: " << s["plan_cycles"].get<std::size_t>()
        << ", events: " << s["events"].get<std::size_t>() << "\n";
    if (s["awaiting_guidance"].get<bool>()) out << "awaiting guidance: drop a file with `archon guide`, then `archon resume`\n";
    out << "obligations: " << s["open_obligations"].size() << " open of " << s["obligations"].size() << "\n";
    for (const auto& [id, ob] : s["obligations"].items()) {
        out << "  " << ob["status"].get<std::string>() << "  " << id << "  (" << ob["attempts"].get<std::size_t>()
            << " attempt(s))\n";
    }
    if (!s["files"].empty()) {
        out << "files:\n";
        for (const auto& [f, v] : s["files"].items()) {
            out << "  " << f << ": " << v["open"].get<std::size_t>() << " open, " << v["closed"].get<std::size_t>()
                << " closed\n";
        }
    }
    if (!s["last_review"].is_null()) {
        const auto& r = s["last_review"];
        out << "last review: " << r["recommendation"].get<std::string>();
        for (const auto& st : r["stalled_obligations"]) {
            out << "; stalled " << st["obligation"].get<std::string>() << " x" << st["attempts"].get<std::size_t>();
        }
        out << "\n";
    }
    if (!s["last_verdict"].is_null()) out << "last verdict: " << (s["last_verdict"]["pass"].get<bool>() ? "pass" : "fail") << "\n";
    return out.str();
}

json run_result_json(const RunResult& r) {
    json j{{"phase", std::string(to_string(r.phase))}, {"reason", r.reason}, {"plan_cycles", r.plan_cycles}};
    if (r.verdict) j["verdict"] = to_json(*r.verdict);
    if (r.review) j["review"] = to_json(*r.review);
    return j;
}

}  // namespace

void init_workspace(const fs::path& root, const std::optional<std::string>& template_name, bool force) {
    if (fs::exists(root) && !fs::is_directory(root)) throw config_error(root.string() + " is not a directory");
    if (fs::exists(root) && !fs::is_empty(root) && !force) {
        throw config_error(root.string() + " is not empty (use --force to initialize anyway)");
    }
    fs::path tmpl;
    if (template_name) {
        tmpl = templates_dir() / *template_name / "template";
        if (!fs::is_directory(tmpl)) throw not_found_error("unknown template '" + *template_name + "'");
    }
    for (const auto& d : workspace_dirs()) fs::create_directories(root / d);
    write_file_atomic(root / kConfigFile, default_config_text());
    fs::create_directories(root / ".archon" / "skills");
    write_file_atomic(root / ".archon" / "skills" / "project-conventions.md", kStarterSkill);
    if (!fs::exists(root / "spec" / "Challenge.mck")) write_file_atomic(root / "spec" / "Challenge.mck", kEmptySpec);
    if (template_name) copy_tree(tmpl, root);
    if (!fs::exists(root / "script.json")) write_file_atomic(root / "script.json", "{\n  \"sessions\": []\n}\n");
}

std::unique_ptr<Provider> make_provider(const Config& config, const fs::path& root) {
    if (config.provider.kind == "http") return std::make_unique<HttpProvider>(config.provider.http);
    auto rel = confine_relative(config.provider.script);
    if (!rel) throw config_error("provider.script escapes the workspace");
    return ScriptedProvider::from_file(root / *rel);
}

RunResult run_workspace(const fs::path& root, const RunOptions& options) {
    auto config = load_config(root);
    if (options.replay) config.run.replay = true;
    WorkspaceLock lock(root);
    auto existing = read_events(root);
    if (options.resume && existing.empty()) throw config_error("nothing to resume: the ledger is empty");

    std::unique_ptr<Clock> clock;
    if (config.run.replay) {
        clock = std::make_unique<LogicalClock>();
    } else {
        clock = std::make_unique<SystemClock>();
    }
    if (existing.empty()) {
        if (config.provider.kind == "scripted") {
            auto rel = confine_relative(config.provider.script);
            if (!rel || !fs::exists(root / *rel)) throw config_error("provider script not found: " + config.provider.script);
            fs::create_directories(root / "ledger");
            write_file_atomic(root / "ledger" / "script.json", read_file(root / *rel));
        }
        if (!fs::exists(root / "checkpoints" / "run-start")) create_checkpoint(root, "run-start", *clock);
    }
    auto provider = make_provider(config, root);
    Orchestrator orch(root, config, *provider, *clock);
    return orch.run(options.stop_at);
}

ReplayResult replay_workspace(const fs::path& root, const std::optional<fs::path>& scratch_dir) {
    auto recorded = read_events(root);
    if (recorded.empty()) throw config_error("no recorded run to replay");
    load_checkpoint(root, "run-start");
    auto script = root / "ledger" / "script.json";
    if (!fs::exists(script)) throw config_error("recorded run has no ledger/script.json");

    fs::path scratch;
    if (scratch_dir) {
        scratch = *scratch_dir;
    } else {
        std::string pattern = (fs::temp_directory_path() / "archon-replay-XXXXXX").string();
        if (!::mkdtemp(pattern.data())) throw infra_error("cannot create scratch directory");
        scratch = fs::path(pattern) / "workspace";
    }
    restore_checkpoint(root, "run-start", scratch);

    auto config = load_config(scratch);
    config.run.replay = true;
    auto provider = ScriptedProvider::from_file(script);
    LogicalClock clock;
    {
        Orchestrator orch(scratch, config, *provider, clock);
        orch.run();
    }
    auto replayed = read_events(scratch);

    ReplayResult r;
    r.scratch = scratch;
    r.recorded_events = recorded.size();
    r.replayed_events = replayed.size();
    auto a = normalized_lines(recorded);
    auto b = normalized_lines(replayed);
    for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
        if (i >= a.size() || i >= b.size() || a[i] != b[i]) {
            r.first_difference = i + 1;
            break;
        }
    }
    r.identical = !r.first_difference;
    return r;
}

GateVerdict verify_workspace(const fs::path& root, bool record) {
    auto config = load_config(root);
    auto state = scan_project(root);
    auto verdict = verify(state, config.checker, load_spec_file(root, config.paths.spec), config.policy);
    if (record) {
        SystemClock clock;
        auto stamp = clock.now();
        for (auto& c : stamp) {
            if (c == ':') c = '-';
        }
        write_verdict(root, stamp, verdict);
    }
    return verdict;
}

std::string add_guidance(const fs::path& root, const fs::path& document) {
    auto text = try_read_file(document);
    if (!text) throw not_found_error("cannot read guidance document " + document.string());
    auto dir = root / "routes" / "guidance";
    fs::create_directories(dir);
    auto name = document.filename().string();
    auto stem = document.stem().string();
    auto ext = document.extension().string();
    for (int n = 2; fs::exists(dir / name); ++n) name = stem + "-" + std::to_string(n) + ext;
    write_file_atomic(dir / name, *text);
    return (fs::path("routes") / "guidance" / name).generic_string();
}

json workspace_status(const fs::path& root) { return to_json(fold(read_events(root))); }

// ---- command line ------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"archon: plan/prove/review orchestration for proof workspaces"};
    app.require_subcommand(1);
    std::string root_arg = ".";
    bool as_json = false;
    app.add_option("-C,--root", root_arg, "Workspace root")->capture_default_str();
    app.add_flag("--json", as_json, "Machine-readable output");

    auto* init = app.add_subcommand("init", "Create a workspace skeleton");
    std::optional<std::string> tmpl;
    bool force = false;
    init->add_option("--template", tmpl, "Install a bundled template (e.g. toy-anderson)");
    init->add_flag("--force", force, "Initialize a non-empty directory");

    bool replay_mode = false;
    std::optional<std::string> stop_at;
    auto* run = app.add_subcommand("run", "Run the orchestrator");
    run->add_flag("--replay", replay_mode, "Logical timestamps for byte-stable ledgers");
    run->add_option("--stop-at", stop_at, "Stop when this phase is reached");
    auto* resume = app.add_subcommand("resume", "Continue an interrupted run");
    resume->add_flag("--replay", replay_mode, "Logical timestamps for byte-stable ledgers");
    resume->add_option("--stop-at", stop_at, "Stop when this phase is reached");

    app.add_subcommand("status", "Show derived ledger views");
    auto* verify_cmd = app.add_subcommand("verify", "Run the final gate");
    bool record = false;
    verify_cmd->add_flag("--record", record, "Persist the verdict under ledger/verdicts/");

    auto* replay = app.add_subcommand("replay", "Re-execute the recorded run and compare ledgers");
    std::optional<std::string> scratch;
    replay->add_option("--scratch", scratch, "Scratch directory for the replay");

    auto* ingest = app.add_subcommand("ingest", "Add a reference document");
    std::string source;
    ingest->add_option("source", source, "Local file or http(s) URL")->required();

    auto* guide = app.add_subcommand("guide", "Drop a guidance document for the next plan cycle");
    std::string document;
    guide->add_option("document", document, "Markdown file")->required();

    auto* search = app.add_subcommand("search", "Search the statement corpus");
    std::string query;
    std::size_t k = 5;
    search->add_option("query", query, "Query text")->required();
    search->add_option("-k", k, "Number of results")->capture_default_str();

    auto* cp = app.add_subcommand("checkpoint", "Create, list, restore or branch checkpoints");
    cp->require_subcommand(1);
    std::string cp_id, cp_target;
    auto* cp_create = cp->add_subcommand("create", "Snapshot workspace and ledger");
    cp_create->add_option("id", cp_id, "Checkpoint id")->required();
    cp->add_subcommand("list", "List checkpoints");
    auto* cp_restore = cp->add_subcommand("restore", "Restore in place");
    cp_restore->add_option("id", cp_id, "Checkpoint id")->required();
    auto* cp_branch = cp->add_subcommand("branch", "Restore into a new directory");
    cp_branch->add_option("id", cp_id, "Checkpoint id")->required();
    cp_branch->add_option("target", cp_target, "Empty or absent directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "archon: " << e.what() << "\n";
        return kExitConfig;
    }

    fs::path root = fs::absolute(root_arg).lexically_normal();
    auto emit = [&](const json& j, const std::string& text) {
        if (as_json) {
            out << j.dump(2) << "\n";
        } else {
            out << text;
        }
    };

    try {
        if (init->parsed()) {
            init_workspace(root, tmpl, force);
            emit({{"root", root.string()}, {"template", tmpl ? json(*tmpl) : json()}},
                 "initialized " + root.string() + (tmpl ? " from template " + *tmpl : std::string()) + "\n");
            return kExitOk;
        }
        if (run->parsed() || resume->parsed()) {
            RunOptions opts;
            opts.replay = replay_mode;
            opts.resume = resume->parsed();
            if (stop_at) opts.stop_at = phase_from_string(*stop_at);
            auto r = run_workspace(root, opts);
            std::ostringstream text;
            text << "phase: " << to_string(r.phase) << " (" << r.reason << ") after " << r.plan_cycles << " plan cycle(s)\n";
            if (r.verdict) text << verdict_text(*r.verdict);
            emit(run_result_json(r), text.str());
            bool ok = r.phase == Phase::done || (opts.stop_at && r.phase == *opts.stop_at);
            return ok ? kExitOk : kExitFailed;
        }
        if (app.got_subcommand("status")) {
            auto s = workspace_status(root);
            emit(s, status_text(s));
            return kExitOk;
        }
        if (verify_cmd->parsed()) {
            auto v = verify_workspace(root, record);
            emit(to_json(v), verdict_text(v));
            return v.pass ? kExitOk : kExitFailed;
        }
        if (replay->parsed()) {
            auto r = replay_workspace(root, scratch ? std::optional<fs::path>(fs::absolute(*scratch)) : std::nullopt);
            json j{{"identical", r.identical},
                   {"recorded_events", r.recorded_events},
                   {"replayed_events", r.replayed_events},
                   {"scratch", r.scratch.string()}};
            if (r.first_difference) j["first_difference"] = *r.first_difference;
            emit(j, r.identical ? "ledger identical (" + std::to_string(r.recorded_events) + " events)\n"
                                : "ledger differs at event " + std::to_string(*r.first_difference) + "\n");
            return r.identical ? kExitOk : kExitFailed;
        }
        if (ingest->parsed()) {
            WorkspaceLock lock(root);
            SystemClock clock;
            auto doc = ingest_reference(root, source, clock);
            emit(json(doc), "references/" + doc.file + " (" + doc.title + ")\n");
            return kExitOk;
        }
        if (guide->parsed()) {
            WorkspaceLock lock(root);
            auto rel = add_guidance(root, document);
            emit({{"path", rel}}, rel + "\n");
            return kExitOk;
        }
        if (search->parsed()) {
            auto config = load_config(root);
            auto corpus = root / config.paths.corpus;
            if (!fs::exists(corpus)) throw not_found_error("no corpus at " + config.paths.corpus);
            auto hits = StatementIndex::load(corpus).search(query, k);
            json j = json::array();
            std::ostringstream text;
            for (const auto& h : hits) {
                j.push_back({{"id", h.id}, {"statement", h.statement}, {"score", h.score}});
                text << h.score << "  " << h.id << "  " << h.statement << "\n";
            }
            emit(j, text.str());
            return kExitOk;
        }
        if (cp->parsed()) {
            SystemClock clock;
            if (cp_create->parsed()) {
                WorkspaceLock lock(root);
                auto c = create_checkpoint(root, cp_id, clock);
                emit(to_json(c), "checkpoint " + c.id + " at event " + std::to_string(c.ledger_position) + "\n");
            } else if (cp_restore->parsed()) {
                if (WorkspaceLock::held(root)) throw infra_error("workspace is locked by a running command");
                restore_checkpoint(root, cp_id, root);
                emit({{"restored", cp_id}}, "restored " + cp_id + "\n");
            } else if (cp_branch->parsed()) {
                auto target = fs::absolute(cp_target).lexically_normal();
                restore_checkpoint(root, cp_id, target);
                emit({{"branch", target.string()}, {"from", cp_id}}, "branched " + cp_id + " into " + target.string() + "\n");
            } else {
                json j = json::array();
                std::ostringstream text;
                for (const auto& c : list_checkpoints(root)) {
                    j.push_back(to_json(c));
                    text << c.id << "  event " << c.ledger_position << "  " << c.created << "\n";
                }
                emit(j, text.str());
            }
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "archon: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "archon: " << e.what() << "\n";
        return kExitInfra;
    }
    return kExitConfig;
}

}  // namespace archon
