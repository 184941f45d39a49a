#include "archon/checkpoint.hpp"
#include "archon/cli.hpp"
#include "archon/orchestrator.hpp"
#include "support/hatch_grep.hpp"
#include "support/ledger_checks.hpp"
#include "support/test_support.hpp"

#include <gtest/gtest.h>

using namespace archon;
using archon::testing::TempDir;

namespace {

fs::path make_workspace(const TempDir& d, const std::optional<std::string>& tmpl, const std::string& name = "ws") {
    auto root = d / name;
    init_workspace(root, tmpl, false);
    return root;
}

std::map<std::string, std::string> sources(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root / "src")) {
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
    }
    return out;
}

struct Driver {
    Config config;
    std::unique_ptr<ScriptedProvider> provider;
    LogicalClock clock;
    std::unique_ptr<Orchestrator> orch;

    explicit Driver(const fs::path& root, std::function<void(Config&)> tweak = {}, std::optional<json> script = std::nullopt) {
        config = load_config(root);
        if (tweak) tweak(config);
        provider = script ? std::make_unique<ScriptedProvider>(*script) : ScriptedProvider::from_file(root / config.provider.script);
        orch = std::make_unique<Orchestrator>(root, config, *provider, clock);
    }
};

json template_script(const std::string& name) {
    return json::parse(read_file(archon::testing::fixtures_dir() / name / "template/script.json"));
}

}  // namespace

TEST(OrchestratorRun, HappyPathReachesDoneWithPassingGate) {
    TempDir d;
    auto root = make_workspace(d, "toy-anderson");
    Driver r(root);
    auto result = r.orch->run();
    EXPECT_EQ(result.phase, Phase::done);
    ASSERT_TRUE(result.verdict);
    EXPECT_TRUE(result.verdict->pass);
    auto view = fold(r.orch->ledger().events());
    EXPECT_TRUE(view.open_obligations().empty());
    EXPECT_EQ(view.obligations.size(), 5u);
    EXPECT_EQ(archon::testing::grep_hatches(root), 0u);
    EXPECT_EQ(sources(root), sources(archon::testing::fixtures_dir() / "toy-anderson/completed"));
    EXPECT_EQ(archon::testing::phase_violation(r.orch->ledger().events()), "");
    EXPECT_EQ(archon::testing::reopen_violation(r.orch->ledger().events()), "");
}

TEST(OrchestratorRun, EveryTransitionAndSessionIsLogged) {
    TempDir d;
    auto root = make_workspace(d, "toy-anderson");
    Driver r(root);
    r.orch->run();
    auto events = r.orch->ledger().events();
    std::vector<std::string> phases;
    std::size_t summaries = 0;
    for (const auto& e : events) {
        if (e.type == EventType::phase_change) phases.push_back(e.data["to"]);
        if (e.type == EventType::session_summary) {
            ++summaries;
            EXPECT_TRUE(fs::exists(root / "ledger/sessions" / (e.data["session"].get<std::string>() + ".json")));
            EXPECT_FALSE(e.data["summary"].get<std::string>().empty());
        }
    }
    EXPECT_EQ(phases, (std::vector<std::string>{"scaffolding", "proving", "polish", "done"}));
    EXPECT_EQ(summaries, fold(events).sessions);
    EXPECT_EQ(json::parse(read_file(root / "ledger/status.json")), to_json(fold(events)));
}

TEST(OrchestratorRun, ScaffoldProducesOneObligationPerClaim) {
    TempDir d;
    auto root = make_workspace(d, "toy-anderson");
    Driver r(root);
    EXPECT_EQ(r.orch->run(Phase::proving).phase, Phase::proving);
    auto claims = parse_informal_claims(read_file(root / "references/informal_proof.md"));
    auto view = fold(r.orch->ledger().events());
    EXPECT_EQ(view.open_obligations().size(), claims.size());
    EXPECT_EQ(sources(root), sources(archon::testing::fixtures_dir() / "toy-anderson/scaffolded"));
}

TEST(OrchestratorRun, ZeroClaimsSkipsScaffolding) {
    TempDir d;
    auto root = make_workspace(d, std::nullopt);
    write_file_atomic(root / "references/informal_proof.md", "Nothing to state.\n");
    Driver r(root);
    auto result = r.orch->run();
    auto events = r.orch->ledger().events();
    ASSERT_GE(events.size(), 2u);
    EXPECT_EQ(events[1].data["reason"], "informal proof has no claims");
    EXPECT_EQ(result.phase, Phase::done);
}

TEST(OrchestratorRun, EmptyProjectIsDoneAfterTrivialGate) {
    TempDir d;
    auto root = make_workspace(d, std::nullopt);
    Driver r(root);
    auto result = r.orch->run();
    EXPECT_EQ(result.phase, Phase::done);
    ASSERT_TRUE(result.verdict);
    EXPECT_TRUE(result.verdict->pass);
    EXPECT_EQ(result.plan_cycles, 0u);
}

TEST(OrchestratorRun, NeverClosingScriptFailsAtCapWithStall) {
    TempDir d;
    auto root = make_workspace(d, "stall");
    Driver r(root);
    auto result = r.orch->run();
    EXPECT_EQ(result.phase, Phase::failed);
    EXPECT_EQ(result.reason, "iteration cap reached");
    EXPECT_EQ(result.plan_cycles, 5u);
    ASSERT_TRUE(result.review);
    ASSERT_EQ(result.review->stalled.size(), 1u);
    EXPECT_EQ(result.review->stalled[0].obligation, "src/T.mck::t");
    EXPECT_NE(result.review->recommendation, Recommendation::continue_work);
    auto events = r.orch->ledger().events();
    EXPECT_EQ(events.back().data["review"]["stalled_obligations"][0]["obligation"], "src/T.mck::t");
    EXPECT_EQ(archon::testing::phase_violation(events), "");
}

TEST(OrchestratorRun, StallEscalationReachesWorkersAsDirective) {
    TempDir d;
    auto root = make_workspace(d, "stall");
    Driver r(root);
    r.orch->run();
    std::vector<std::string> recommendations;
    for (const auto& e : r.orch->ledger().events()) {
        if (e.type == EventType::review_report) recommendations.push_back(e.data["recommendation"]);
    }
    ASSERT_GE(recommendations.size(), 5u);
    EXPECT_EQ(recommendations[2], "revise_decomposition");
    EXPECT_EQ(recommendations[3], "escalate_informal");
    EXPECT_EQ(recommendations[4], "request_guidance");

    bool directed = false;
    for (const auto& req : r.provider->requests()) {
        if (req.role == Role::worker && req.task.guidance.find("ask_informal") != std::string::npos) directed = true;
    }
    EXPECT_TRUE(directed);
}

TEST(OrchestratorRun, RequestGuidancePausesUntilAFileIsDropped) {
    TempDir d;
    auto root = make_workspace(d, "stall");
    Driver r(root, [](Config& c) { c.budgets.iteration_cap = 10; });
    auto result = r.orch->run();
    EXPECT_EQ(result.phase, Phase::proving);
    EXPECT_EQ(result.reason, "awaiting guidance");
    EXPECT_TRUE(fold(r.orch->ledger().events()).awaiting_guidance);

    add_guidance(root, [&] {
        write_file_atomic(d / "hint.md", "# Hint\nThe statement is false; 2 + 2 = 4.\n");
        return d / "hint.md";
    }());
    auto resumed = r.orch->run();
    auto view = fold(r.orch->ledger().events());
    EXPECT_EQ(view.injected_guidance.count("routes/guidance/hint.md"), 1u);
    EXPECT_NE(resumed.reason, "");
    bool seen = false;
    for (const auto& req : r.provider->requests()) {
        if (req.role == Role::plan && req.system_prompt.find("The statement is false; 2 + 2 = 4.") != std::string::npos) seen = true;
    }
    EXPECT_TRUE(seen);
}

TEST(OrchestratorRun, ParallelWaveIsIndependentOfScheduling) {
    TempDir d;
    std::vector<ProjectState> finals;
    for (auto mode : {ScheduleMode::forward, ScheduleMode::reverse, ScheduleMode::parallel}) {
        auto root = make_workspace(d, "two-groups", std::string(to_string(mode)));
        Driver r(root, [&](Config& c) { c.run.schedule = mode; });
        EXPECT_EQ(r.orch->run().phase, Phase::done);
        auto st = scan_project(root);
        st.root.clear();
        finals.push_back(st);
    }
    EXPECT_EQ(finals[0], finals[1]);
    EXPECT_EQ(finals[0], finals[2]);
}

TEST(OrchestratorRun, TwoGroupsRunAsOneWaveWithTwoSummaries) {
    TempDir d;
    auto root = make_workspace(d, "two-groups");
    Driver r(root);
    r.orch->start();
    r.orch->refresh();
    auto tasks = r.orch->plan_cycle();
    ASSERT_EQ(tasks.size(), 2u);
    for (const auto& a : tasks[0].scope) {
        for (const auto& b : tasks[1].scope) EXPECT_FALSE(scopes_overlap(a, b));
    }
    auto before = fold(r.orch->ledger().events()).sessions;
    auto records = r.orch->prove_cycle(tasks);
    ASSERT_EQ(records.size(), 2u);
    auto view = fold(r.orch->ledger().events());
    EXPECT_EQ(view.sessions, before + 2);
    EXPECT_TRUE(view.open_obligations().empty());
}

TEST(OrchestratorRun, FailingSessionLeavesObligationOpenAndCountsAttempt) {
    TempDir d;
    auto root = make_workspace(d, "stall");
    Driver r(root);
    r.orch->start();
    r.orch->refresh();
    auto tasks = r.orch->plan_cycle();
    ASSERT_EQ(tasks.size(), 1u);
    r.orch->prove_cycle(tasks);
    auto events = r.orch->ledger().events();
    auto view = fold(events);
    EXPECT_EQ(view.obligations.at("src/T.mck::t").status, ObligationStatus::open);
    EXPECT_EQ(view.obligations.at("src/T.mck::t").attempts, 1u);
    bool diagnosed = false;
    for (const auto& e : events) {
        if (e.type == EventType::session_summary && e.data.contains("signatures")) {
            diagnosed = !e.data["signatures"]["src/T.mck::t"].get<std::string>().empty();
        }
    }
    EXPECT_TRUE(diagnosed);
}

TEST(OrchestratorRun, ReviewDoesNotTouchTheWorkspace) {
    TempDir d;
    auto root = make_workspace(d, "stall");
    Driver r(root);
    r.orch->run(Phase::proving);
    r.orch->refresh();
    r.orch->prove_cycle(r.orch->plan_cycle());
    auto before = r.orch->state();
    auto files = sources(root);
    r.orch->review_cycle();
    EXPECT_EQ(r.orch->state(), before);
    EXPECT_EQ(sources(root), files);
}

TEST(OrchestratorPolish, QualityPassThatBreaksTheBuildIsReverted) {
    TempDir d;
    auto root = make_workspace(d, "toy-anderson");
    auto script = template_script("toy-anderson");
    for (auto& s : script["sessions"]) {
        if (s["match"].value("kind", "") != "polish") continue;
        s["turns"] = json::array({{{"tool_calls", json::array({{{"tool", "edit_file"},
                                                               {"arguments", {{"path", "src/Basic.mck"}, {"content", "theorem unit_mul : 1 * 7 = 8 := refl\n"}}}}})}},
                                  {{"tool_calls", json::array({{{"tool", "write_summary"}, {"arguments", {{"summary", "oops"}}}}})}}});
    }
    Driver r(root, {}, script);
    auto result = r.orch->run();
    EXPECT_EQ(result.phase, Phase::done);
    bool reverted = false;
    for (const auto& e : r.orch->ledger().events()) {
        if (e.type == EventType::refactor_event && e.data["action"] == "reverted") reverted = true;
    }
    EXPECT_TRUE(reverted);
    EXPECT_NE(read_file(root / "src/Basic.mck").find("1 * 7 = 7 := refl"), std::string::npos);
    EXPECT_EQ(archon::testing::reopen_violation(r.orch->ledger().events()), "");
}

TEST(OrchestratorPolish, QualityPassThatStillPassesLogsRefactor) {
    TempDir d;
    auto root = make_workspace(d, "toy-anderson");
    Driver r(root);
    r.orch->run();
    bool refactor = false;
    for (const auto& e : r.orch->ledger().events()) {
        if (e.type == EventType::refactor_event && e.data["action"] == "quality_pass") refactor = true;
    }
    EXPECT_TRUE(refactor);
    EXPECT_NE(read_file(root / "src/Fiber.mck").find("by_lemma unit_mul"), std::string::npos);
}

TEST(OrchestratorPolish, LeftoverSorryReopensItsDeclaration) {
    TempDir d;
    auto root = make_workspace(d, "toy-anderson");
    {
        Driver r(root);
        EXPECT_EQ(r.orch->run(Phase::polish).phase, Phase::polish);
    }
    auto text = read_file(root / "src/Fiber.mck");
    auto at = text.find("fiber_dim : 2 * (1 + 2) = 6 := refl");
    ASSERT_NE(at, std::string::npos);
    text.replace(text.find("refl", at), 4, "sorry");
    write_file_atomic(root / "src/Fiber.mck", text);

    Driver r(root, [](Config& c) { c.run.quality_pass = false; });
    auto verdict = r.orch->polish_cycle();
    EXPECT_FALSE(verdict.pass);
    EXPECT_EQ(r.orch->phase(), Phase::proving);
    auto view = fold(r.orch->ledger().events());
    EXPECT_EQ(view.open_obligations(), (std::vector<std::string>{"src/Fiber.mck::fiber_dim"}));
    EXPECT_EQ(r.orch->ledger().events().back().data["to"], "proving");
    EXPECT_EQ(archon::testing::reopen_violation(r.orch->ledger().events()), "");
}

TEST(OrchestratorPolish, UnfixableGateFailureEndsFailed) {
    TempDir d;
    auto root = make_workspace(d, std::nullopt);
    write_file_atomic(root / "spec/Challenge.mck", "theorem goal : 1 = 1 := sorry\n");
    Driver r(root);
    auto result = r.orch->run();
    EXPECT_EQ(result.phase, Phase::failed);
    ASSERT_TRUE(result.verdict);
    EXPECT_EQ(result.verdict->failing_checks(), (std::set<std::string>{"spec"}));
}

TEST(OrchestratorRefactor, RenamedDeclarationIsLoggedAsRefactor) {
    TempDir d;
    auto root = make_workspace(d, "toy-anderson");
    Driver r(root);
    r.orch->run(Phase::proving);
    auto text = read_file(root / "src/Basic.mck");
    text.replace(text.find("small_sum"), 9, "small_add");
    write_file_atomic(root / "src/Basic.mck", text);
    r.orch->refresh();
    auto events = r.orch->ledger().events();
    bool refactored = false, opened = false;
    for (const auto& e : events) {
        if (e.type == EventType::obligation_event && e.data["obligation"] == "src/Basic.mck::small_sum" &&
            e.data["event"] == "refactored")
            refactored = true;
        if (e.type == EventType::obligation_event && e.data["obligation"] == "src/Basic.mck::small_add" &&
            e.data["event"] == "opened")
            opened = true;
    }
    EXPECT_TRUE(refactored);
    EXPECT_TRUE(opened);
    EXPECT_EQ(archon::testing::reopen_violation(events), "");
}

TEST(OrchestratorLock, SecondRunOnSameWorkspaceIsRefused) {
    TempDir d;
    auto root = make_workspace(d, std::nullopt);
    WorkspaceLock lock(root);
    EXPECT_TRUE(WorkspaceLock::held(root));
    EXPECT_THROW(WorkspaceLock again(root), Error);
}

TEST(OrchestratorLock, StaleLockIsTakenOver) {
    TempDir d;
    auto root = make_workspace(d, std::nullopt);
    write_file_atomic(root / "ledger/.lock", "999999999\n");
    EXPECT_FALSE(WorkspaceLock::held(root));
    WorkspaceLock lock(root);
    EXPECT_TRUE(WorkspaceLock::held(root));
}

TEST(InformalClaims, ParsesLemmaAndTheoremHeadings) {
    auto claims = parse_informal_claims("intro\n# lemma unit_mul\nbody a\n\n# theorem main\nbody b\n## note\n");
    ASSERT_EQ(claims.size(), 2u);
    EXPECT_EQ(claims[0].kind, "lemma");
    EXPECT_EQ(claims[0].label, "unit_mul");
    EXPECT_NE(claims[1].body.find("body b"), std::string::npos);
    EXPECT_TRUE(parse_informal_claims("no headings\n").empty());
}
