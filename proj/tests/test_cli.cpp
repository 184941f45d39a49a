#include "archon/cli.hpp"
#include "archon/ledger.hpp"
#include "support/test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace archon;
using archon::testing::TempDir;

namespace {

struct Out {
    int code = -1;
    std::string out;
    std::string err;
};

Out cli(std::vector<std::string> args) {
    std::ostringstream o, e;
    Out r;
    r.code = run_cli(args, o, e);
    r.out = o.str();
    r.err = e.str();
    return r;
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        out[fs::relative(e.path(), root).generic_string()] = e.is_regular_file() ? read_file(e.path()) : "<dir>";
    }
    return out;
}

}  // namespace

TEST(CliInit, CreatesSkeletonInEmptyDirectory) {
    TempDir d;
    auto root = (d / "ws").string();
    auto r = cli({"-C", root, "init"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    for (const auto& dir : workspace_dirs()) EXPECT_TRUE(fs::is_directory(d / ("ws/" + dir))) << dir;
    EXPECT_EQ(workspace_dirs().size(), 6u);
    EXPECT_NO_THROW(load_config(d / "ws"));
    EXPECT_FALSE(load_skills(d / "ws/.archon/skills").empty());
    bool project_skill = false;
    for (const auto& s : load_skills(d / "ws/.archon/skills")) project_skill = project_skill || s.scope == SkillScope::project;
    EXPECT_TRUE(project_skill);
}

TEST(CliInit, TemplateInstallsInformalProofAndSpec) {
    TempDir d;
    auto r = cli({"-C", (d / "ws").string(), "init", "--template", "toy-anderson"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    auto tmpl = archon::testing::fixtures_dir() / "toy-anderson/template";
    EXPECT_EQ(read_file(d / "ws/references/informal_proof.md"), read_file(tmpl / "references/informal_proof.md"));
    EXPECT_EQ(read_file(d / "ws/spec/Challenge.mck"), read_file(tmpl / "spec/Challenge.mck"));
    EXPECT_EQ(cli({"-C", (d / "other").string(), "init", "--template", "no-such"}).code, kExitConfig);
}

TEST(CliInit, ReinitWithoutForceIsRefusedAndLeavesWorkspaceUntouched) {
    TempDir d;
    auto root = (d / "ws").string();
    ASSERT_EQ(cli({"-C", root, "init", "--template", "toy-anderson"}).code, kExitOk);
    write_file_atomic(d / "ws/src/Mine.mck", "theorem mine : 1 = 1 := refl\n");
    auto before = tree(d / "ws");
    auto r = cli({"-C", root, "init"});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("--force"), std::string::npos);
    EXPECT_EQ(tree(d / "ws"), before);
    EXPECT_EQ(cli({"-C", root, "init", "--force"}).code, kExitOk);
    EXPECT_TRUE(fs::exists(d / "ws/src/Mine.mck"));
}

TEST(CliRun, HappyPathThenVerifyStatusAndReplay) {
    TempDir d;
    auto root = (d / "ws").string();
    ASSERT_EQ(cli({"-C", root, "init", "--template", "toy-anderson"}).code, kExitOk);
    auto run = cli({"-C", root, "--json", "run"});
    ASSERT_EQ(run.code, kExitOk) << run.err;
    auto rj = json::parse(run.out);
    EXPECT_EQ(rj["phase"], "done");
    EXPECT_EQ(rj["verdict"]["pass"], true);

    auto verify = cli({"-C", root, "--json", "verify"});
    EXPECT_EQ(verify.code, kExitOk);
    auto vj = json::parse(verify.out);
    EXPECT_EQ(vj["pass"], true);
    EXPECT_TRUE(vj.contains("failing_checks"));

    auto status = cli({"-C", root, "--json", "status"});
    EXPECT_EQ(status.code, kExitOk);
    EXPECT_EQ(json::parse(status.out), to_json(fold(read_events(d / "ws"))));

    auto replay = cli({"-C", root, "replay"});
    EXPECT_EQ(replay.code, kExitOk) << replay.err;
    EXPECT_NE(replay.out.find("ledger identical"), std::string::npos);

    EXPECT_EQ(cli({"-C", root, "run"}).code, kExitOk);  // already done
}

TEST(CliRun, StatusMidRunMatchesLedgerFold) {
    TempDir d;
    auto root = (d / "ws").string();
    ASSERT_EQ(cli({"-C", root, "init", "--template", "toy-anderson"}).code, kExitOk);
    ASSERT_EQ(cli({"-C", root, "run", "--stop-at", "proving"}).code, kExitOk);
    auto s = json::parse(cli({"-C", root, "--json", "status"}).out);
    EXPECT_EQ(s["phase"], "proving");

    // Independent fold: replay opened/closed events by hand.
    std::set<std::string> open;
    std::istringstream lines(read_file(d / "ws/ledger/events.ndjson"));
    for (std::string line; std::getline(lines, line);) {
        auto e = json::parse(line);
        if (e["type"] != "obligation_event") continue;
        auto what = e["data"]["event"].get<std::string>();
        auto id = e["data"]["obligation"].get<std::string>();
        if (what == "opened" || what == "reopened") open.insert(id);
        if (what == "closed" || what == "refactored") open.erase(id);
    }
    EXPECT_EQ(s["open_obligations"].size(), 5u);
    EXPECT_EQ(s["open_obligations"].get<std::set<std::string>>(), open);

    auto text = cli({"-C", root, "status"});
    EXPECT_NE(text.out.find("phase: proving"), std::string::npos);
    EXPECT_NE(text.out.find("5 open of 5"), std::string::npos);

    auto resumed = cli({"-C", root, "resume"});
    EXPECT_EQ(resumed.code, kExitOk) << resumed.err;
    EXPECT_EQ(json::parse(cli({"-C", root, "--json", "status"}).out)["phase"], "done");
}

TEST(CliRun, StatusReadsOnlyTheLedger) {
    TempDir d;
    auto root = (d / "ws").string();
    ASSERT_EQ(cli({"-C", root, "init", "--template", "toy-anderson"}).code, kExitOk);
    ASSERT_EQ(cli({"-C", root, "run", "--stop-at", "proving"}).code, kExitOk);
    auto before = cli({"-C", root, "--json", "status"}).out;
    fs::remove_all(d / "ws/src");
    fs::remove(d / "ws/archon.toml");
    EXPECT_EQ(cli({"-C", root, "--json", "status"}).out, before);
}

TEST(CliRun, StallEndsWithGateFailureCode) {
    TempDir d;
    auto root = (d / "ws").string();
    ASSERT_EQ(cli({"-C", root, "init", "--template", "stall"}).code, kExitOk);
    auto r = cli({"-C", root, "--json", "run"});
    EXPECT_EQ(r.code, kExitFailed);
    auto j = json::parse(r.out);
    EXPECT_EQ(j["phase"], "failed");
    EXPECT_EQ(j["review"]["stalled_obligations"][0]["obligation"], "src/T.mck::t");
}

TEST(CliExitCodes, StableContractPerCommand) {
    TempDir d;
    auto root = (d / "ws").string();
    EXPECT_EQ(cli({"bogus"}).code, kExitConfig);
    EXPECT_EQ(cli({}).code, kExitConfig);
    EXPECT_EQ(cli({"-C", root, "run"}).code, kExitConfig);  // not initialized
    EXPECT_EQ(cli({"-C", root, "verify"}).code, kExitConfig);
    EXPECT_EQ(cli({"--help"}).code, kExitOk);

    ASSERT_EQ(cli({"-C", root, "init", "--template", "toy-anderson"}).code, kExitOk);
    EXPECT_EQ(cli({"-C", root, "resume"}).code, kExitConfig);  // nothing to resume
    EXPECT_EQ(cli({"-C", root, "replay"}).code, kExitConfig);  // nothing recorded
    EXPECT_EQ(cli({"-C", root, "verify"}).code, kExitFailed);  // spec theorem missing
    EXPECT_EQ(cli({"-C", root, "guide", (d / "absent.md").string()}).code, kExitConfig);
    EXPECT_EQ(cli({"-C", root, "checkpoint", "restore", "nope"}).code, kExitConfig);

    write_file_atomic(d / "ws/archon.toml", "schema_version = 1\nsurprise = true\n");
    EXPECT_EQ(cli({"-C", root, "run"}).code, kExitConfig);

    write_file_atomic(d / "ws/archon.toml", "schema_version = 1\n");
    write_file_atomic(d / "ws/ledger/events.ndjson", "{not json\n");
    EXPECT_EQ(cli({"-C", root, "status"}).code, kExitInfra);

    fs::remove(d / "ws/ledger/events.ndjson");
    write_file_atomic(d / "ws/archon.toml",
                      "schema_version = 1\n[backend]\nkind = \"external\"\ncommand = \"/nonexistent/checker {file}\"\n");
    write_file_atomic(d / "ws/src/X.lean", "theorem x : True := trivial\n");
    EXPECT_EQ(cli({"-C", root, "verify"}).code, kExitFailed);
}

TEST(CliGuide, CopiesDocumentIntoGuidanceDirectory) {
    TempDir d;
    auto root = (d / "ws").string();
    ASSERT_EQ(cli({"-C", root, "init"}).code, kExitOk);
    d.write("blueprint.md", "# Blueprint\nsteps\n");
    auto r = cli({"-C", root, "guide", (d / "blueprint.md").string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(read_file(d / "ws/routes/guidance/blueprint.md"), "# Blueprint\nsteps\n");
    EXPECT_EQ(cli({"-C", root, "guide", (d / "blueprint.md").string()}).code, kExitOk);
    EXPECT_TRUE(fs::exists(d / "ws/routes/guidance/blueprint-2.md"));
}

TEST(CliIngest, AddsLocalReferenceOnce) {
    TempDir d;
    auto root = (d / "ws").string();
    ASSERT_EQ(cli({"-C", root, "init"}).code, kExitOk);
    d.write("paper.md", "# A paper\ntext\n");
    ASSERT_EQ(cli({"-C", root, "ingest", (d / "paper.md").string()}).code, kExitOk);
    ASSERT_EQ(cli({"-C", root, "ingest", (d / "paper.md").string()}).code, kExitOk);
    EXPECT_EQ(load_manifest(d / "ws").size(), 1u);
    EXPECT_EQ(cli({"-C", root, "ingest", (d / "missing.md").string()}).code, kExitConfig);
}

TEST(CliSearch, RanksFixtureCorpus) {
    TempDir d;
    auto root = (d / "ws").string();
    ASSERT_EQ(cli({"-C", root, "init", "--template", "toy-anderson"}).code, kExitOk);
    auto r = cli({"-C", root, "--json", "search", "multiplication by one", "-k", "2"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(json::parse(r.out).size(), 2u);
}

TEST(CliCheckpoint, CreateListRestoreBranch) {
    TempDir d;
    auto root = (d / "ws").string();
    ASSERT_EQ(cli({"-C", root, "init", "--template", "toy-anderson"}).code, kExitOk);
    ASSERT_EQ(cli({"-C", root, "run", "--stop-at", "proving"}).code, kExitOk);
    ASSERT_EQ(cli({"-C", root, "checkpoint", "create", "c1"}).code, kExitOk);
    auto list = json::parse(cli({"-C", root, "--json", "checkpoint", "list"}).out);
    std::set<std::string> ids;
    for (const auto& c : list) ids.insert(c["id"].get<std::string>());
    EXPECT_EQ(ids, (std::set<std::string>{"c1", "run-start"}));

    auto scaffolded = read_file(d / "ws/src/Basic.mck");
    ASSERT_EQ(cli({"-C", root, "resume"}).code, kExitOk);
    ASSERT_NE(read_file(d / "ws/src/Basic.mck"), scaffolded);
    ASSERT_EQ(cli({"-C", root, "checkpoint", "restore", "c1"}).code, kExitOk);
    EXPECT_EQ(read_file(d / "ws/src/Basic.mck"), scaffolded);
    EXPECT_EQ(json::parse(cli({"-C", root, "--json", "status"}).out)["phase"], "proving");

    ASSERT_EQ(cli({"-C", root, "checkpoint", "branch", "c1", (d / "branch").string()}).code, kExitOk);
    EXPECT_EQ(read_file(d / "branch/ledger/events.ndjson"), read_file(d / "ws/ledger/events.ndjson"));
}
