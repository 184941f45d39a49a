#include "archon/error.hpp"
#include "archon/ledger.hpp"
#include "archon/review.hpp"
#include "support/test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace archon;
using archon::testing::TempDir;

namespace {

json worker_summary(const std::string& session, const std::string& ob, const std::string& sig, bool closed = false) {
    return {{"session", session},
            {"role", "worker"},
            {"outcome", "completed"},
            {"summary", "attempt"},
            {"targets", {ob}},
            {"closed", closed ? json::array({ob}) : json::array()},
            {"signatures", {{ob, sig}}}};
}

std::vector<LedgerEvent> stalled_ledger(const fs::path& root, std::size_t sessions, bool same_signature = true) {
    LogicalClock clock;
    Ledger l(root, clock);
    for (std::size_t i = 0; i < sessions; ++i) {
        l.append(EventType::session_summary,
                 worker_summary("S" + std::to_string(i + 1), "src/T.mck::t", same_signature ? "E:type mismatch" : "E" + std::to_string(i)));
    }
    return l.events();
}

}  // namespace

TEST(LedgerLog, AppendsChainAndRereads) {
    TempDir d;
    LogicalClock clock;
    Ledger l(d.path(), clock);
    l.append(EventType::phase_change, {{"from", nullptr}, {"to", "scaffolding"}, {"reason", "start"}});
    l.append(EventType::phase_change, {{"from", "scaffolding"}, {"to", "proving"}, {"reason", "x"}});
    auto events = read_events(d.path());
    ASSERT_EQ(events.size(), 2u);
    EXPECT_EQ(events, l.events());
    EXPECT_EQ(events[1].hash, chain_hash(events[0].hash, events[1]));
    EXPECT_EQ(l.head_hash(), events[1].hash);
    EXPECT_EQ(json::parse(read_file(d / "ledger/status.json"))["phase"], "proving");

    Ledger reopened(d.path(), clock);
    EXPECT_EQ(reopened.size(), 2u);
}

TEST(LedgerLog, EveryPrefixWasTheLedgerAtSomeInstant) {
    TempDir d;
    LogicalClock clock;
    Ledger l(d.path(), clock);
    std::vector<std::string> snapshots;
    for (int i = 0; i < 12; ++i) {
        l.append(EventType::refactor_event, {{"action", "note"}, {"i", i}});
        snapshots.push_back(read_file(d / "ledger/events.ndjson"));
    }
    const auto& final = snapshots.back();
    for (const auto& s : snapshots) EXPECT_EQ(final.compare(0, s.size(), s), 0);
}

TEST(LedgerLog, TamperingIsDetected) {
    TempDir d;
    LogicalClock clock;
    {
        Ledger l(d.path(), clock);
        l.append(EventType::refactor_event, {{"action", "a"}});
        l.append(EventType::refactor_event, {{"action", "b"}});
    }
    auto text = read_file(d / "ledger/events.ndjson");
    auto at = text.find("\"a\"");
    text.replace(at, 3, "\"z\"");
    write_file_atomic(d / "ledger/events.ndjson", text);
    EXPECT_THROW(read_events(d.path()), Error);
}

TEST(LedgerLog, NormalizedLinesIgnoreTimestamps) {
    TempDir a, b;
    LogicalClock c1;
    SystemClock c2;
    Ledger la(a.path(), c1), lb(b.path(), c2);
    for (auto* l : {&la, &lb}) l->append(EventType::refactor_event, {{"action", "x"}});
    EXPECT_NE(la.events()[0].ts, lb.events()[0].ts);
    EXPECT_EQ(normalized_lines(la.events()), normalized_lines(lb.events()));
}

TEST(PhaseRelation, OnlyDocumentedTransitionsAreLegal) {
    const Phase all[] = {Phase::scaffolding, Phase::proving, Phase::polish, Phase::done, Phase::failed};
    std::set<std::pair<Phase, Phase>> legal{{Phase::scaffolding, Phase::proving}, {Phase::proving, Phase::proving},
                                            {Phase::proving, Phase::polish},      {Phase::polish, Phase::done},
                                            {Phase::polish, Phase::proving},      {Phase::scaffolding, Phase::failed},
                                            {Phase::proving, Phase::failed},      {Phase::polish, Phase::failed}};
    for (auto a : all) {
        for (auto b : all) EXPECT_EQ(legal_transition(a, b), legal.count({a, b}) == 1) << to_string(a) << "->" << to_string(b);
    }
}

TEST(LedgerFold, TracksObligationsAndFiles) {
    TempDir d;
    LogicalClock clock;
    Ledger l(d.path(), clock);
    auto ob = [&](const std::string& event, const std::string& id, const std::string& file) {
        l.append(EventType::obligation_event, {{"event", event}, {"obligation", id}, {"file", file}, {"declaration", "x"}, {"session", "S1"}});
    };
    l.append(EventType::phase_change, {{"from", nullptr}, {"to", "proving"}, {"reason", "r"}});
    ob("opened", "a.mck::x", "a.mck");
    ob("opened", "b.mck::y", "b.mck");
    l.append(EventType::obligation_event, {{"event", "attempted"}, {"obligation", "a.mck::x"}, {"outcome", "failed"}, {"session", "S1"}});
    ob("closed", "a.mck::x", "a.mck");
    l.append(EventType::session_summary, {{"session", "S2"}, {"role", "plan"}, {"summary", "p"}, {"guidance_files", {"routes/guidance/g.md"}}});
    auto v = fold(l.events());
    EXPECT_EQ(v.phase, Phase::proving);
    EXPECT_EQ(v.open_obligations(), (std::vector<std::string>{"b.mck::y"}));
    EXPECT_EQ(v.obligations.at("a.mck::x").attempts, 1u);
    EXPECT_EQ(v.files.at("a.mck").closed, 1u);
    EXPECT_EQ(v.files.at("b.mck").open, 1u);
    EXPECT_EQ(v.plan_cycles, 1u);
    EXPECT_EQ(v.injected_guidance.count("routes/guidance/g.md"), 1u);
    EXPECT_EQ(to_json(v), json::parse(read_file(d / "ledger/status.json")));
}

TEST(LedgerFold, GuidanceRequestSetsAwaitingUntilNextPlan) {
    TempDir d;
    LogicalClock clock;
    Ledger l(d.path(), clock);
    l.append(EventType::guidance_request, {{"reason", "stalled"}});
    EXPECT_TRUE(fold(l.events()).awaiting_guidance);
    l.append(EventType::session_summary, {{"session", "S1"}, {"role", "plan"}, {"summary", "p"}});
    EXPECT_FALSE(fold(l.events()).awaiting_guidance);
}

TEST(LedgerFold, RecentSummariesAreMostRecentLast) {
    TempDir d;
    auto events = stalled_ledger(d.path(), 5);
    auto r = recent_summaries(events, 2);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[1]["session"], "S5");
}

// ---- review ----

TEST(Review, ThreeIdenticalFailuresStall) {
    TempDir d;
    auto r = review_cycle(stalled_ledger(d.path(), 3), {});
    ASSERT_EQ(r.stalled.size(), 1u);
    EXPECT_EQ(r.stalled[0].obligation, "src/T.mck::t");
    EXPECT_EQ(r.stalled[0].attempts, 3u);
    EXPECT_NE(r.recommendation, Recommendation::continue_work);
}

TEST(Review, TwoSessionsAreBelowThreshold) {
    TempDir d;
    auto r = review_cycle(stalled_ledger(d.path(), 2), {});
    EXPECT_TRUE(r.stalled.empty());
    EXPECT_EQ(r.recommendation, Recommendation::continue_work);
}

TEST(Review, SingleSessionWindowCannotStall) {
    TempDir d;
    auto r = review_cycle(stalled_ledger(d.path(), 6), {1, 3});
    EXPECT_EQ(r.sessions, 1u);
    EXPECT_TRUE(r.stalled.empty());
}

TEST(Review, NewSignatureBreaksTheRun) {
    TempDir d;
    EXPECT_TRUE(review_cycle(stalled_ledger(d.path(), 4, false), {}).stalled.empty());
}

TEST(Review, ClosureBreaksTheRun) {
    TempDir d;
    LogicalClock clock;
    Ledger l(d.path(), clock);
    l.append(EventType::session_summary, worker_summary("S1", "o", "s"));
    l.append(EventType::session_summary, worker_summary("S2", "o", "s"));
    l.append(EventType::session_summary, worker_summary("S3", "o", "s", true));
    auto r = review_cycle(l.events(), {});
    EXPECT_TRUE(r.stalled.empty());
    EXPECT_EQ(r.closed_in_window, 1u);
    EXPECT_EQ(r.recommendation, Recommendation::continue_work);
}

TEST(Review, LadderClimbsPerConsecutiveStalledReview) {
    TempDir d;
    LogicalClock clock;
    Ledger l(d.path(), clock);
    for (int i = 1; i <= 3; ++i) l.append(EventType::session_summary, worker_summary("S" + std::to_string(i), "o", "s"));
    std::vector<Recommendation> seen;
    for (int i = 0; i < 4; ++i) {
        auto r = review_cycle(l.events(), {});
        seen.push_back(r.recommendation);
        l.append(EventType::review_report, to_json(r));
    }
    EXPECT_EQ(seen, (std::vector<Recommendation>{Recommendation::revise_decomposition, Recommendation::escalate_informal,
                                                 Recommendation::request_guidance, Recommendation::request_guidance}));
    l.append(EventType::review_report, to_json(ReviewReport{}));
    EXPECT_EQ(review_cycle(l.events(), {}).recommendation, Recommendation::revise_decomposition);
}

TEST(Review, ReportRoundTripsThroughJson) {
    ReviewReport r;
    r.first_session = "S1";
    r.last_session = "S4";
    r.sessions = 4;
    r.stalled = {{"a::b", 3}};
    r.recommendation = Recommendation::escalate_informal;
    r.notes = "n";
    EXPECT_EQ(review_from_json(to_json(r)), r);
}

TEST(Review, IsPureOverTheEventSequence) {
    TempDir d;
    auto events = stalled_ledger(d.path(), 3);
    auto before = read_file(d / "ledger/events.ndjson");
    EXPECT_EQ(review_cycle(events, {}), review_cycle(events, {}));
    EXPECT_EQ(read_file(d / "ledger/events.ndjson"), before);
}
