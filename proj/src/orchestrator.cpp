#include "archon/orchestrator.hpp"

#include "archon/checkpoint.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <iomanip>
#include <sstream>
#include <thread>

namespace archon {

// ---- informal proofs -------------------------------------------------------------

std::vector<InformalClaim> parse_informal_claims(std::string_view text) {
    std::vector<InformalClaim> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (starts_with(t, "# ")) {
            auto words = split_words(t.substr(2));
            if (words.size() >= 2 && (words[0] == "lemma" || words[0] == "theorem")) {
                out.push_back({words[0], words[1], ""});
                continue;
            }
        }
        if (!out.empty()) out.back().body += line + "\n";
    }
    for (auto& c : out) c.body = trim(c.body);
    return out;
}

// ---- lock ----------------------------------------------------------------------------

namespace {

fs::path lock_path(const fs::path& root) { return root / "ledger" / ".lock"; }

bool pid_alive(pid_t pid) { return pid > 0 && (::kill(pid, 0) == 0 || errno == EPERM); }

}  // namespace

WorkspaceLock::WorkspaceLock(const fs::path& root) : path_(lock_path(root)) {
    fs::create_directories(path_.parent_path());
    for (int attempt = 0; attempt < 2; ++attempt) {
        int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd >= 0) {
            auto pid = std::to_string(::getpid()) + "\n";
            [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
            ::close(fd);
            return;
        }
        if (errno != EEXIST) throw infra_error("cannot create " + path_.string() + ": " + std::strerror(errno));
        auto owner = try_read_file(path_);
        pid_t pid = owner ? static_cast<pid_t>(std::atoi(owner->c_str())) : 0;
        if (pid_alive(pid)) throw infra_error("workspace is locked by process " + std::to_string(pid));
        fs::remove(path_);
    }
    throw infra_error("cannot acquire " + path_.string());
}

WorkspaceLock::~WorkspaceLock() {
    std::error_code ec;
    fs::remove(path_, ec);
}

bool WorkspaceLock::held(const fs::path& root) {
    auto owner = try_read_file(lock_path(root));
    return owner && pid_alive(static_cast<pid_t>(std::atoi(owner->c_str())));
}

// ---- orchestrator ----------------------------------------------------------------------

struct Orchestrator::Assessment {
    CheckReport report;
    std::vector<EscapeHatchHit> hits;
    FootprintResult footprint;
    std::set<std::string> spec_mismatched;  // declaration names
    std::set<std::string> error_files;
    std::set<std::string> blocked;          // declaration ids with a hatch hit or a disallowed axiom

    /// An obligation closes when its declaration would pass every per-declaration gate check.
    bool closable(const Declaration& d) const {
        return d.proof_state != ProofState::placeholder && !d.parse_error && !error_files.count(d.file) &&
               !blocked.count(d.id()) && !spec_mismatched.count(d.name);
    }
};

namespace {

bool span_contains(const Span& outer, const Position& p) { return outer.start <= p && p <= outer.end; }

const Declaration* declaration_at(const ProjectState& st, const std::string& file, const Position& p) {
    for (const auto* d : st.declarations_in(file)) {
        if (d->kind != DeclKind::import_directive && span_contains(d->span, p)) return d;
    }
    return nullptr;
}

std::vector<EscapeHatchHit> policy_hits(const ProjectState& st, const GatePolicy& policy) {
    auto hits = escape_hatch_scan(st, policy.lexicon);
    if (policy.allow_declared_axioms) {
        hits.erase(std::remove_if(hits.begin(), hits.end(),
                                  [](const EscapeHatchHit& h) { return h.category == HatchCategory::axiom_intro; }),
                   hits.end());
    }
    return hits;
}

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
    std::string out;
    for (const auto& x : xs) out += (out.empty() ? "" : sep) + x;
    return out;
}

}  // namespace

Orchestrator::Orchestrator(fs::path root, Config config, Provider& provider, Clock& clock)
    : root_(std::move(root)),
      config_(std::move(config)),
      provider_(provider),
      clock_(clock),
      ledger_(root_, clock_),
      workspace_(root_, scan_project(root_)) {
    skills_ = load_skills(root_ / config_.paths.skills);
    auto corpus = root_ / config_.paths.corpus;
    index_ = std::make_unique<StatementIndex>(fs::exists(corpus) ? StatementIndex::load(corpus)
                                                                  : StatementIndex(std::vector<StatementRecord>{}));
    env_.workspace = &workspace_;
    env_.checker = config_.checker;
    env_.index = index_.get();
    env_.informal = &provider_;
    env_.clock = &clock_;
    env_.read_ledger = [this](std::size_t limit) { return recent_summaries(ledger_.events(), limit); };
    session_counter_ = fold(ledger_.events()).sessions;
    install_obligations();
}

std::optional<Phase> Orchestrator::phase() const { return fold(ledger_.events()).phase; }

std::string Orchestrator::next_session_id() {
    std::ostringstream id;
    id << "S" << std::setw(4) << std::setfill('0') << ++session_counter_;
    return id.str();
}

void Orchestrator::start() {
    if (!phase()) ledger_.append(EventType::phase_change, {{"from", nullptr}, {"to", "scaffolding"}, {"reason", "run started"}});
}

void Orchestrator::set_phase(Phase to, const std::string& reason, json extra) {
    auto from = phase();
    if (!from || !legal_transition(*from, to)) {
        throw contract_error("illegal phase transition to " + std::string(to_string(to)));
    }
    json data{{"from", std::string(to_string(*from))}, {"to", std::string(to_string(to))}, {"reason", reason}};
    for (auto& [k, v] : extra.items()) data[k] = v;
    ledger_.append(EventType::phase_change, data);
}

Orchestrator::Assessment Orchestrator::assess(const ProjectState& st) const {
    Assessment a;
    a.report = check(st, config_.checker);
    a.hits = policy_hits(st, config_.policy);
    a.footprint = check_axiom_footprint(a.report, config_.policy.allowed_axioms);
    if (auto spec = load_spec_file(root_, config_.paths.spec)) {
        auto rep = compare_spec(*spec, st);
        for (const auto& m : rep.mismatched) a.spec_mismatched.insert(m.name);
    }
    for (const auto& d : a.report.diagnostics) {
        if (d.severity == Severity::error) a.error_files.insert(d.file);
    }
    for (const auto& h : a.hits) {
        if (auto* d = declaration_at(st, h.file, h.span.start)) a.blocked.insert(d->id());
    }
    for (const auto& [key, axiom] : a.footprint.offending) {
        for (const auto& [id, d] : st.declarations) {
            if (id == key || (d.name == key && d.kind != DeclKind::import_directive)) a.blocked.insert(id);
        }
    }
    return a;
}

std::string Orchestrator::signature(const ProjectState& st, const CheckReport& report, const std::string& obligation) const {
    auto it = st.declarations.find(obligation);
    if (it == st.declarations.end()) return "absent";
    const auto& d = it->second;
    std::string material;
    for (const auto& diag : report.diagnostics) {
        if (diag.file != d.file || diag.severity == Severity::info || !span_contains(d.span, diag.span.start)) continue;
        material += std::string(to_string(diag.kind)) + "|" + diag.message + "\n";
    }
    return hex64(fnv1a(material));
}

void Orchestrator::install_obligations() {
    auto view = fold(ledger_.events());
    auto st = workspace_.snapshot();
    st.obligations.clear();
    for (const auto& [id, ob] : view.obligations) {
        Obligation o{id, ob.file, ob.declaration, ob.status, ob.history};
        st.obligations.emplace(id, std::move(o));
    }
    workspace_.replace(std::move(st));
}

void Orchestrator::reconcile(const std::string& session, bool gate_reopen) {
    auto st = workspace_.snapshot();
    auto a = assess(st);
    auto view = fold(ledger_.events());

    std::vector<json> events;
    std::vector<std::string> removed, added;
    std::set<std::string> ids;
    for (const auto& [id, ob] : view.obligations) ids.insert(id);
    for (const auto& [id, d] : st.declarations) {
        if (d.kind == DeclKind::theorem && d.proof_state == ProofState::placeholder) ids.insert(id);
    }
    for (const auto& id : ids) {
        auto known = view.obligations.find(id);
        auto decl = st.declarations.find(id);
        bool was_open = known != view.obligations.end() && known->second.status != ObligationStatus::closed;
        bool was_closed = known != view.obligations.end() && known->second.status == ObligationStatus::closed;
        json base{{"obligation", id}, {"session", session}};
        if (decl == st.declarations.end()) {
            if (was_open) {
                removed.push_back(id);
                base["event"] = "refactored";
                base["file"] = known->second.file;
                base["declaration"] = known->second.declaration;
                events.push_back(base);
            }
            continue;
        }
        base["file"] = decl->second.file;
        base["declaration"] = decl->second.name;
        bool ok = a.closable(decl->second);
        if (known == view.obligations.end()) {
            added.push_back(id);
            base["event"] = "opened";
            events.push_back(base);
            if (ok) {
                base["event"] = "closed";
                events.push_back(base);
            }
        } else if (was_open && ok) {
            base["event"] = "closed";
            events.push_back(base);
        } else if (was_closed && !ok) {
            base["event"] = "reopened";
            base["reason"] = gate_reopen ? "gate" : "reverted";
            events.push_back(base);
        }
    }

    bool reverted = std::any_of(events.begin(), events.end(),
                                [](const json& e) { return e["event"] == "reopened" && e["reason"] == "reverted"; });
    if (!removed.empty() || reverted) {
        std::vector<std::string> reopened;
        for (const auto& e : events) {
            if (e["event"] == "reopened") reopened.push_back(e["obligation"]);
        }
        ledger_.append(EventType::refactor_event, {{"action", "restructured"},
                                                   {"session", session},
                                                   {"removed", removed},
                                                   {"added", added},
                                                   {"reverted", reopened}});
    }
    for (auto& e : events) ledger_.append(EventType::obligation_event, std::move(e));
    install_obligations();
}

void Orchestrator::refresh() {
    auto fresh = scan_project(root_);
    workspace_.replace(std::move(fresh));
    reconcile("");
}

SessionRequest Orchestrator::request_for(const std::string& id, Role role, PlanTask task, std::string materials) const {
    SessionRequest req;
    req.id = id;
    req.role = role;
    std::size_t budget = role == Role::worker ? config_.budgets.worker_tokens
                         : role == Role::plan ? config_.budgets.plan_tokens
                                              : config_.budgets.review_tokens;
    if (task.budget == 0) task.budget = budget;
    req.budget = Budget{task.budget, config_.budgets.max_turns};
    req.task = std::move(task);
    req.skills = skills_;
    req.materials = std::move(materials);
    req.retry_limit = config_.provider.retry_limit;
    return req;
}

void Orchestrator::commit_session(const SessionRecord& rec, json extra) {
    auto transcript = fs::path("ledger") / "sessions" / (rec.id + ".json");
    write_file_atomic(root_ / transcript, to_json(rec).dump(2) + "\n");
    json data{{"session", rec.id},
              {"role", std::string(to_string(rec.role))},
              {"task", to_json(rec.task)},
              {"outcome", std::string(to_string(rec.outcome))},
              {"summary", rec.summary},
              {"tool_calls", rec.tool_calls},
              {"tokens", rec.tokens()},
              {"edited", rec.edited},
              {"transcript", transcript.generic_string()}};
    for (auto& [k, v] : extra.items()) data[k] = v;
    ledger_.append(EventType::session_summary, data);
}

std::string Orchestrator::scope_materials(const std::vector<std::string>& scope) const {
    auto st = workspace_.snapshot();
    std::ostringstream out;
    for (const auto& [path, f] : st.files) {
        bool covered = std::any_of(scope.begin(), scope.end(), [&](const std::string& s) { return scope_covers(s, path); });
        if (!covered) continue;
        out << "### " << path << "\n```\n" << f.content << (f.content.empty() || f.content.back() == '\n' ? "" : "\n")
            << "```\n";
    }
    return out.str();
}

std::vector<std::string> Orchestrator::pending_guidance() const {
    auto dir = root_ / "routes" / "guidance";
    std::vector<std::string> out;
    if (!fs::is_directory(dir)) return out;
    auto injected = fold(ledger_.events()).injected_guidance;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        auto rel = fs::relative(e.path(), root_).generic_string();
        if (!injected.count(rel)) out.push_back(rel);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---- phases ----------------------------------------------------------------------------

void Orchestrator::scaffold() {
    auto informal = try_read_file(root_ / config_.paths.informal_proof).value_or("");
    auto claims = parse_informal_claims(informal);
    if (claims.empty()) {
        refresh();
        set_phase(Phase::proving, "informal proof has no claims");
        return;
    }

    std::ostringstream guidance;
    guidance << "Create source files under src/ that state every claim of the informal proof as a theorem "
                "with a `sorry` proof. Claims:";
    for (const auto& c : claims) guidance << " " << c.label;
    guidance << ".";
    PlanTask task;
    task.id = "scaffold-" + std::to_string(fold(ledger_.events()).sessions + 1);
    task.kind = "scaffold";
    task.scope = {"src/"};
    task.guidance = guidance.str();
    task.constraints = "Do not prove anything yet; every claim becomes one obligation.";

    auto id = next_session_id();
    auto rec = run_session(request_for(id, Role::worker, task, "### " + config_.paths.informal_proof + "\n" + informal),
                           provider_, env_);
    workspace_.replace(scan_project(root_));
    install_obligations();
    commit_session(rec, {{"targets", json::array()}, {"closed", json::array()}});
    if (rec.outcome != SessionOutcome::completed) return;
    reconcile(id);
    set_phase(Phase::proving, "scaffold complete",
              {{"obligations", fold(ledger_.events()).open_obligations().size()}});
}

std::vector<PlanTask> Orchestrator::plan_cycle() {
    auto st = workspace_.snapshot();
    auto view = fold(ledger_.events());
    std::vector<std::string> open;
    for (const auto* ob : st.open_obligations()) open.push_back(ob->id);
    if (open.empty()) return {};

    std::optional<ReviewReport> review;
    if (view.last_review) review = review_from_json(*view.last_review);
    auto guidance_files = pending_guidance();
    if (review && review->recommendation == Recommendation::request_guidance && guidance_files.empty()) {
        json stalled = json::array();
        for (const auto& s : review->stalled) stalled.push_back(s.obligation);
        ledger_.append(EventType::guidance_request,
                       {{"reason", "review recommends human guidance"}, {"stalled", stalled},
                        {"drop_dir", "routes/guidance/"}});
        return {};
    }

    auto groups = dependency_partition(st);
    std::ostringstream materials;
    materials << "### Open obligations\n";
    for (const auto& id : open) {
        const auto& d = st.declarations.at(id);
        materials << "- " << id << " : " << d.statement_text() << "\n";
    }
    materials << "\n### Dependency groups\n";
    for (std::size_t i = 0; i < groups.size(); ++i) {
        materials << "- group " << i << ": files " << join(groups[i].files, ", ") << "; obligations "
                  << join(groups[i].obligations, ", ") << "\n";
    }
    if (review) {
        materials << "\n### Latest review\nrecommendation: " << to_string(review->recommendation) << "\n";
        for (const auto& s : review->stalled) materials << "stalled: " << s.obligation << " (" << s.attempts << " sessions)\n";
    }
    auto recent = recent_summaries(ledger_.events(), 3);
    if (!recent.empty()) {
        materials << "\n### Recent sessions\n";
        for (const auto& r : recent) materials << "- " << r["session"].get<std::string>() << " " << r["role"].get<std::string>()
                                               << " " << r["outcome"].get<std::string>() << ": "
                                               << r["summary"].get<std::string>() << "\n";
    }

    PlanTask plan_task;
    plan_task.id = "plan-" + std::to_string(view.plan_cycles + 1);
    plan_task.kind = "plan";
    plan_task.targets = open;
    for (const auto& g : guidance_files) {
        plan_task.guidance += "### Guidance: " + g + "\n" + read_file(root_ / g) + "\n";
    }

    auto id = next_session_id();
    auto rec = run_session(request_for(id, Role::plan, plan_task, materials.str()), provider_, env_);

    std::vector<PlanTask> tasks;
    std::set<std::string> open_set(open.begin(), open.end());
    std::vector<std::string> taken;  // scope entries of accepted tasks
    auto group_of = [&](const std::string& file) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (std::find(groups[i].files.begin(), groups[i].files.end(), file) != groups[i].files.end()) return i;
        }
        return std::nullopt;
    };

    bool revise = rec.output.contains("revise_decomposition") && rec.output["revise_decomposition"].is_string() &&
                  !trim(rec.output["revise_decomposition"].get<std::string>()).empty();
    if (revise) {
        PlanTask t;
        t.id = id + "-revision";
        t.kind = "revision";
        t.targets = open;
        t.scope = {"src/"};
        t.guidance = rec.output["revise_decomposition"].get<std::string>();
        t.constraints = "Restructure the decomposition; renamed or removed obligations are closed as refactored.";
        tasks.push_back(t);
    } else if (rec.output.contains("tasks") && rec.output["tasks"].is_array()) {
        for (const auto& spec : rec.output["tasks"]) {
            if (!spec.is_object()) continue;
            PlanTask t;
            std::set<std::size_t> touched;
            if (spec.contains("group") && spec["group"].is_number_unsigned()) {
                auto g = spec["group"].get<std::size_t>();
                if (g >= groups.size()) continue;
                t.targets = groups[g].obligations;
                touched.insert(g);
            } else {
                for (const auto& x : spec.value("targets", std::vector<std::string>{})) {
                    if (open_set.count(x)) t.targets.push_back(x);
                }
                for (const auto& x : t.targets) {
                    if (auto g = group_of(st.obligations.at(x).file)) touched.insert(*g);
                }
            }
            if (t.targets.empty()) continue;
            std::set<std::string> scope;
            for (const auto& s : spec.value("scope", std::vector<std::string>{})) {
                if (auto rel = confine_relative(s)) scope.insert(*rel);
            }
            for (auto g : touched) scope.insert(groups[g].files.begin(), groups[g].files.end());
            t.scope.assign(scope.begin(), scope.end());
            bool clash = std::any_of(t.scope.begin(), t.scope.end(), [&](const std::string& s) {
                return std::any_of(taken.begin(), taken.end(), [&](const std::string& o) { return scopes_overlap(s, o); });
            });
            if (clash) continue;
            taken.insert(taken.end(), t.scope.begin(), t.scope.end());
            std::sort(t.targets.begin(), t.targets.end());
            t.id = id + "-t" + std::to_string(tasks.size() + 1);
            t.kind = "prove";
            t.guidance = spec.value("guidance", "");
            t.constraints = spec.value("constraints", "");
            t.parallel_group = touched.empty() ? 0 : static_cast<int>(*touched.begin());
            tasks.push_back(t);
        }
    }

    bool fallback = tasks.empty();
    if (fallback) {
        const auto& ob = st.obligations.at(open.front());
        PlanTask t;
        t.id = id + "-fallback";
        t.kind = "prove";
        t.targets = {ob.id};
        t.scope = {ob.file};
        t.guidance = "Close " + ob.id + ".";
        t.parallel_group = static_cast<int>(group_of(ob.file).value_or(0));
        tasks.push_back(t);
    }
    if (review && review->recommendation == Recommendation::escalate_informal) {
        for (auto& t : tasks) {
            t.guidance += (t.guidance.empty() ? "" : "\n") +
                          std::string("Directive: call ask_informal for an informal argument before editing.");
        }
    }
    for (auto& t : tasks) t.budget = config_.budgets.worker_tokens;

    json emitted = json::array();
    for (const auto& t : tasks) emitted.push_back(to_json(t));
    commit_session(rec, {{"emitted", emitted}, {"fallback", fallback}, {"guidance_files", guidance_files},
                         {"targets", json::array()}, {"closed", json::array()}});
    return tasks;
}

std::vector<SessionRecord> Orchestrator::prove_cycle(const std::vector<PlanTask>& tasks) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        for (std::size_t j = i + 1; j < tasks.size(); ++j) {
            for (const auto& a : tasks[i].scope) {
                for (const auto& b : tasks[j].scope) {
                    if (scopes_overlap(a, b)) throw contract_error("tasks " + tasks[i].id + " and " + tasks[j].id + " overlap");
                }
            }
        }
    }

    std::vector<OpenSession> open;
    for (const auto& t : tasks) {
        std::ostringstream materials;
        auto st = workspace_.snapshot();
        for (const auto& target : t.targets) {
            auto it = st.declarations.find(target);
            if (it != st.declarations.end()) materials << "target " << target << " : " << it->second.statement_text() << "\n";
        }
        materials << "\n" << scope_materials(t.scope);
        open.push_back(open_session(request_for(next_session_id(), Role::worker, t, materials.str()), provider_));
    }

    std::vector<std::optional<SessionRecord>> records(open.size());
    auto drive = [&](std::size_t i) {
        auto id = open[i].request.id;
        auto task = open[i].request.task;
        try {
            records[i] = drive_session(std::move(open[i]), env_);
        } catch (const std::exception& e) {
            SessionRecord rec;
            rec.id = id;
            rec.task = task;
            rec.outcome = SessionOutcome::aborted;
            rec.summary = std::string("Session aborted: ") + e.what();
            records[i] = std::move(rec);
        }
    };
    switch (config_.run.schedule) {
    case ScheduleMode::forward:
        for (std::size_t i = 0; i < open.size(); ++i) drive(i);
        break;
    case ScheduleMode::reverse:
        for (std::size_t i = open.size(); i-- > 0;) drive(i);
        break;
    case ScheduleMode::parallel:
        for (std::size_t start = 0; start < open.size(); start += config_.budgets.parallelism) {
            std::vector<std::thread> threads;
            auto end = std::min(open.size(), start + config_.budgets.parallelism);
            for (std::size_t i = start; i < end; ++i) threads.emplace_back(drive, i);
            for (auto& th : threads) th.join();
        }
        break;
    }

    auto st = workspace_.snapshot();
    auto a = assess(st);
    auto check_name = "cycle-" + std::to_string(fold(ledger_.events()).plan_cycles);
    write_check_report(root_, check_name, a.report);

    // Closure is decided against the post-wave state, then committed in task order.
    std::vector<std::pair<std::set<std::string>, json>> per_task;
    for (const auto& t : tasks) {
        std::set<std::string> closed;
        json sigs = json::object();
        for (const auto& target : t.targets) {
            auto it = st.declarations.find(target);
            if (it == st.declarations.end() || a.closable(it->second)) {
                closed.insert(target);
            } else {
                sigs[target] = signature(st, a.report, target);
            }
        }
        per_task.emplace_back(closed, sigs);
    }
    std::vector<SessionRecord> out;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        auto& rec = *records[i];
        const auto& [closed, sigs] = per_task[i];
        commit_session(rec, {{"targets", tasks[i].targets}, {"closed", closed}, {"signatures", sigs},
                             {"check", "ledger/checks/" + check_name + ".json"}});
        for (const auto& target : tasks[i].targets) {
            ledger_.append(EventType::obligation_event,
                           {{"obligation", target},
                            {"event", "attempted"},
                            {"session", rec.id},
                            {"outcome", rec.outcome == SessionOutcome::aborted ? "aborted"
                                        : closed.count(target)                  ? "closed"
                                                                                : "open"}});
        }
        out.push_back(std::move(rec));
    }
    reconcile(out.empty() ? std::string() : out.back().id);
    return out;
}

ReviewReport Orchestrator::review_cycle() {
    ReviewPolicy policy{config_.budgets.review_window, config_.budgets.stall_threshold};
    auto report = archon::review_cycle(ledger_.events(), policy);
    if (config_.run.review_agent) {
        PlanTask t;
        t.id = "review-" + std::to_string(fold(ledger_.events()).plan_cycles);
        t.kind = "review";
        auto id = next_session_id();
        auto rec = run_session(request_for(id, Role::review, t, "### Computed report\n" + to_json(report).dump(2)),
                               provider_, env_);
        report.notes = rec.summary;
        commit_session(rec, {{"targets", json::array()}, {"closed", json::array()}});
    }
    ledger_.append(EventType::review_report, to_json(report));
    return report;
}

GateVerdict Orchestrator::polish_cycle() {
    auto spec = [&] { return load_spec_file(root_, config_.paths.spec); };
    if (config_.run.quality_pass) {
        auto before_state = workspace_.snapshot();
        auto before = verify(before_state, config_.checker, spec(), config_.policy);
        PlanTask t;
        t.id = "polish-" + std::to_string(fold(ledger_.events()).sessions + 1);
        t.kind = "polish";
        t.scope = {"src/"};
        t.guidance = "Extract reusable lemmas and simplify proofs.";
        t.constraints = "The gate must still pass after your edits.";
        auto id = next_session_id();
        auto rec = run_session(request_for(id, Role::worker, t, scope_materials(t.scope)), provider_, env_);
        commit_session(rec, {{"targets", json::array()}, {"closed", json::array()}});
        if (!rec.edited.empty()) {
            auto after = verify(workspace_.snapshot(), config_.checker, spec(), config_.policy);
            auto was = before.failing_checks();
            bool regressed = !after.build_ok && before.build_ok;
            for (const auto& c : after.failing_checks()) regressed = regressed || !was.count(c);
            if (regressed) {
                for (const auto& path : rec.edited) {
                    auto it = before_state.files.find(path);
                    if (it != before_state.files.end()) {
                        write_file_atomic(root_ / path, it->second.content);
                    } else {
                        fs::remove(root_ / path);
                    }
                }
                workspace_.replace(scan_project(root_));
                install_obligations();
                ledger_.append(EventType::refactor_event,
                               {{"action", "reverted"}, {"session", id}, {"files", rec.edited},
                                {"reason", "quality pass broke the gate"}});
            } else {
                ledger_.append(EventType::refactor_event, {{"action", "quality_pass"}, {"session", id}, {"files", rec.edited}});
            }
        }
        reconcile(id);
    }

    auto st = workspace_.snapshot();
    auto verdict = verify(st, config_.checker, spec(), config_.policy);
    auto stamp = "v" + std::to_string(ledger_.size() + 1);
    auto path = write_verdict(root_, stamp, verdict);
    json failing = verdict.failing_checks();
    ledger_.append(EventType::gate_verdict, {{"pass", verdict.pass},
                                             {"failing_checks", failing},
                                             {"hatch_hits", verdict.hatch_hits.size()},
                                             {"offending", verdict.footprint.offending},
                                             {"spec_mismatched", verdict.spec_report.mismatched.size()},
                                             {"spec_missing", verdict.spec_report.missing},
                                             {"verdict", fs::relative(path, root_).generic_string()}});
    if (verdict.pass) {
        set_phase(Phase::done, "gate passed");
        return verdict;
    }

    std::set<std::string> reopen;
    for (const auto& h : verdict.hatch_hits) {
        if (auto* d = declaration_at(st, h.file, h.span.start)) reopen.insert(d->id());
    }
    auto by_name = [&](const std::string& name) {
        for (const auto& [id, d] : st.declarations) {
            if ((d.name == name || id == name) && d.kind != DeclKind::import_directive) reopen.insert(id);
        }
    };
    for (const auto& [decl, axiom] : verdict.footprint.offending) by_name(decl);
    for (const auto& m : verdict.spec_report.mismatched) by_name(m.name);
    for (const auto& d : verdict.diagnostics) {
        if (d.severity != Severity::error) continue;
        if (auto* decl = declaration_at(st, d.file, d.span.start)) reopen.insert(decl->id());
    }

    auto view = fold(ledger_.events());
    std::size_t reopened = 0;
    for (const auto& id : reopen) {
        const auto& d = st.declarations.at(id);
        auto known = view.obligations.find(id);
        if (known != view.obligations.end() && known->second.status != ObligationStatus::closed) continue;
        ledger_.append(EventType::obligation_event, {{"obligation", id},
                                                     {"event", known == view.obligations.end() ? "opened" : "reopened"},
                                                     {"reason", "gate"},
                                                     {"file", d.file},
                                                     {"declaration", d.name},
                                                     {"session", ""}});
        ++reopened;
    }
    install_obligations();
    if (fold(ledger_.events()).open_obligations().empty()) {
        set_phase(Phase::failed, "gate failed with nothing to reopen", {{"failing_checks", failing}});
    } else {
        set_phase(Phase::proving, "gate failed", {{"failing_checks", failing}, {"reopened", reopened}});
    }
    return verdict;
}

RunResult Orchestrator::run(std::optional<Phase> stop_at) {
    start();
    RunResult result;
    std::size_t scaffold_attempts = 0;
    while (true) {
        auto view = fold(ledger_.events());
        auto current = *view.phase;
        result.phase = current;
        result.plan_cycles = view.plan_cycles;
        if (view.last_review) result.review = review_from_json(*view.last_review);
        if (current == Phase::done || current == Phase::failed) {
            result.reason = current == Phase::done ? "gate passed" : "failed";
            const auto& events = ledger_.events();
            for (auto it = events.rbegin(); it != events.rend(); ++it) {
                if (it->type == EventType::phase_change) {
                    result.reason = it->data.value("reason", result.reason);
                    break;
                }
            }
            return result;
        }
        if (stop_at && current == *stop_at) {
            result.reason = "stopped at " + std::string(to_string(current));
            return result;
        }
        switch (current) {
        case Phase::scaffolding:
            if (scaffold_attempts++ >= config_.budgets.iteration_cap) {
                set_phase(Phase::failed, "scaffolding did not complete");
                break;
            }
            scaffold();
            break;
        case Phase::proving: {
            refresh();
            if (fold(ledger_.events()).open_obligations().empty()) {
                set_phase(Phase::polish, "all obligations closed");
                break;
            }
            if (view.plan_cycles >= config_.budgets.iteration_cap) {
                auto final_review = review_cycle();
                result.review = final_review;
                set_phase(Phase::failed, "iteration cap reached", {{"review", to_json(final_review)}});
                break;
            }
            auto tasks = plan_cycle();
            if (tasks.empty()) {
                result.phase = Phase::proving;
                result.reason = "awaiting guidance";
                result.plan_cycles = fold(ledger_.events()).plan_cycles;
                return result;
            }
            prove_cycle(tasks);
            result.review = review_cycle();
            break;
        }
        case Phase::polish: result.verdict = polish_cycle(); break;
        default: break;
        }
    }
}

}  // namespace archon
