#include "archon/error.hpp"
#include "archon/config.hpp"
#include "archon/toml.hpp"

#include <gtest/gtest.h>

using namespace archon;

TEST(Toml, ParsesTablesScalarsAndArrays) {
    auto j = parse_toml(R"(
top = 1
[a]
s = "x\ty"   # comment
lit = 'c:\path'
f = 1.5
flag = true
arr = [
  "one",
  "two",
]
[a.b]
"quoted key" = -3
)");
    EXPECT_EQ(j["top"], 1);
    EXPECT_EQ(j["a"]["s"], "x\ty");
    EXPECT_EQ(j["a"]["lit"], "c:\\path");
    EXPECT_DOUBLE_EQ(j["a"]["f"].get<double>(), 1.5);
    EXPECT_EQ(j["a"]["flag"], true);
    EXPECT_EQ(j["a"]["arr"], json::array({"one", "two"}));
    EXPECT_EQ(j["a"]["b"]["quoted key"], -3);
}

TEST(Toml, RejectsDuplicatesAndGarbage) {
    EXPECT_THROW(parse_toml("a = 1\na = 2\n"), Error);
    EXPECT_THROW(parse_toml("[t]\n[t]\n"), Error);
    EXPECT_THROW(parse_toml("a = \n"), Error);
    EXPECT_THROW(parse_toml("a = \"unterminated\n"), Error);
    EXPECT_THROW(parse_toml("just words\n"), Error);
}

TEST(ConfigParse, DefaultTextYieldsDocumentedDefaults) {
    auto c = parse_config(default_config_text());
    Config d;
    EXPECT_EQ(to_json(c), to_json(d));
    EXPECT_EQ(c.budgets.worker_tokens, 4096u);
    EXPECT_EQ(c.budgets.plan_tokens, 2048u);
    EXPECT_EQ(c.budgets.stall_threshold, 3u);
    EXPECT_EQ(c.budgets.iteration_cap, 50u);
    EXPECT_FALSE(c.budgets.max_turns.has_value());
    EXPECT_EQ(c.provider.kind, "scripted");
    EXPECT_EQ(c.checker.backend, Backend::toy);
}

TEST(ConfigParse, MinimalFileNeedsOnlySchemaVersion) {
    auto c = parse_config("schema_version = 1\n");
    EXPECT_EQ(c.paths.spec, "spec/Challenge.mck");
    EXPECT_THROW(parse_config(""), Error);
    EXPECT_THROW(parse_config("schema_version = 2\n"), Error);
}

TEST(ConfigParse, UnknownKeysAreRejected) {
    EXPECT_THROW(parse_config("schema_version = 1\nextra = 1\n"), Error);
    EXPECT_THROW(parse_config("schema_version = 1\n[budgets]\nworker_token = 5\n"), Error);
    EXPECT_THROW(parse_config("schema_version = 1\n[gossip]\n"), Error);
}

TEST(ConfigParse, WrongTypesAndValuesAreRejected) {
    EXPECT_THROW(parse_config("schema_version = 1\n[budgets]\nworker_tokens = \"many\"\n"), Error);
    EXPECT_THROW(parse_config("schema_version = 1\n[provider]\nkind = \"carrier-pigeon\"\n"), Error);
    EXPECT_THROW(parse_config("schema_version = 1\n[provider]\nkind = \"http\"\n"), Error);
    EXPECT_THROW(parse_config("schema_version = 1\n[backend]\nkind = \"external\"\n"), Error);
    EXPECT_THROW(parse_config("schema_version = 1\n[paths]\nspec = \"../outside.mck\"\n"), Error);
    EXPECT_THROW(parse_config("schema_version = 1\n[run]\nschedule = \"sideways\"\n"), Error);
    EXPECT_THROW(parse_config("schema_version = 1\n[budgets]\nstall_threshold = 9\nreview_window = 4\n"), Error);
}

TEST(ConfigParse, PolicyAndProviderSections) {
    auto c = parse_config(R"(schema_version = 1
[backend]
kind = "external"
command = "lean {file}"
timeout_ms = 0
[provider]
kind = "http"
endpoint = "http://localhost:1/v1"
api_key_env = "KEY"
[policy]
allowed_axioms = ["propext", "Quot.sound"]
allow_declared_axioms = true
[budgets]
max_turns = 7
[policy.lexicon]
cheat = "placeholder"
)");
    EXPECT_EQ(c.checker.backend, Backend::external);
    EXPECT_FALSE(c.checker.timeout.has_value());
    EXPECT_EQ(c.provider.http.api_key_env, "KEY");
    EXPECT_EQ(c.policy.allowed_axioms, (std::set<std::string>{"propext", "Quot.sound"}));
    EXPECT_TRUE(c.policy.allow_declared_axioms);
    EXPECT_EQ(c.budgets.max_turns, 7u);
    EXPECT_EQ(c.policy.lexicon, (HatchLexicon{{"cheat", HatchCategory::placeholder}}));
    EXPECT_THROW(parse_config("schema_version = 1\n[policy.lexicon]\ncheat = \"mystery\"\n"), Error);
}

TEST(ConfigParse, ExternalBackendGetsExternalLexicon) {
    auto c = parse_config("schema_version = 1\n[backend]\nkind = \"external\"\ncommand = \"x\"\n");
    EXPECT_TRUE(c.policy.lexicon.count("sorry"));
    EXPECT_TRUE(c.policy.lexicon.count("admit"));
}
