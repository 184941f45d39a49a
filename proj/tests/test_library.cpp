#include "archon/error.hpp"
#include "archon/library.hpp"
#include "support/cosine_oracle.hpp"
#include "support/test_support.hpp"

#include <gtest/gtest.h>

using namespace archon;
using archon::testing::TempDir;
using archon::testing::oracle_top;
using archon::testing::random_corpus;

TEST(WordTokens, LowercasesAndSplitsOnPunctuation) {
    EXPECT_EQ(word_tokens("Quasi-complete Ring_hom, 2x"), (std::vector<std::string>{"quasi", "complete", "ring_hom", "2x"}));
    EXPECT_TRUE(word_tokens("  -- ").empty());
}

TEST(StatementSearch, AgreesWithExactOracleAcrossQueries) {
    std::mt19937 rng(1234);
    auto corpus = random_corpus(rng, 100);
    StatementIndex index(corpus);
    auto queries = random_corpus(rng, 20);
    for (const auto& q : queries) {
        for (std::size_t k : {1u, 5u, 10u}) {
            std::vector<std::string> got;
            for (const auto& h : index.search(q.statement, k)) got.push_back(h.id);
            EXPECT_EQ(got, oracle_top(corpus, q.statement, k)) << q.statement << " k=" << k;
        }
    }
}

TEST(StatementSearch, ReturnsMinOfKAndSize) {
    StatementIndex index({{"b", "ring"}, {"a", "ring"}});
    auto hits = index.search("ring", 10);
    ASSERT_EQ(hits.size(), 2u);
    EXPECT_EQ(hits[0].id, "a");
    EXPECT_DOUBLE_EQ(hits[0].score, 1.0);
    EXPECT_TRUE(index.search("ring", 0).empty());
}

TEST(StatementSearch, QueryWithoutWordsMatchesNothing) {
    StatementIndex index({{"z", "ring"}, {"m", "field"}});
    EXPECT_TRUE(index.search("", 3).empty());
    EXPECT_TRUE(index.search("-- + *", 3).empty());
}

TEST(StatementSearch, LoadsJsonLines) {
    TempDir d;
    d.write("c.jsonl", "{\"id\": \"x\", \"statement\": \"flat module\"}\n\n{\"id\": \"y\", \"statement\": \"ring\"}\n");
    auto index = StatementIndex::load(d / "c.jsonl");
    EXPECT_EQ(index.size(), 2u);
    EXPECT_EQ(index.search("flat", 1).at(0).id, "x");
}

TEST(StatementSearch, FixtureCorpusFindsUnitLemma) {
    auto index = StatementIndex::load(archon::testing::fixtures_dir() / "toy-anderson/template/references/corpus.jsonl");
    EXPECT_GE(index.size(), 10u);
    EXPECT_FALSE(index.search("multiplication by one", 3).empty());
}

TEST(References, IngestIsIdempotentBySource) {
    TempDir d;
    d.write("notes/paper.md", "# Generic fibers\nbody\n");
    LogicalClock clock;
    auto a = ingest_reference(d.path(), (d / "notes/paper.md").string(), clock);
    auto b = ingest_reference(d.path(), (d / "notes/paper.md").string(), clock);
    EXPECT_EQ(a, b);
    EXPECT_EQ(load_manifest(d.path()).size(), 1u);
    EXPECT_EQ(read_reference(d.path(), a.file).value(), "# Generic fibers\nbody\n");
    EXPECT_TRUE(read_reference(d.path(), a.title).has_value());
}

TEST(References, MissingSourceLeavesNothingBehind) {
    TempDir d;
    LogicalClock clock;
    EXPECT_THROW(ingest_reference(d.path(), (d / "absent.md").string(), clock), Error);
    EXPECT_TRUE(load_manifest(d.path()).empty());
}

TEST(References, UnknownNameIsNotFound) {
    TempDir d;
    EXPECT_FALSE(read_reference(d.path(), "nothing.md").has_value());
    EXPECT_FALSE(read_reference(d.path(), "../etc/passwd").has_value());
}

TEST(Routes, RecordedUnderSanitizedObligationDirectory) {
    TempDir d;
    auto rel = record_route(d.path(), "src/Main.mck::main_theorem", "S0001-1", "Evaluate directly.");
    EXPECT_EQ(rel.rfind("routes/", 0), 0u);
    EXPECT_EQ(rel.find("::"), std::string::npos);
    EXPECT_EQ(read_file(d.path() / rel), "Evaluate directly.");
    auto again = record_route(d.path(), "src/Main.mck::main_theorem", "S0001-1", "Second route.");
    EXPECT_NE(rel, again);
    EXPECT_EQ(read_file(d.path() / rel), "Evaluate directly.");
}
