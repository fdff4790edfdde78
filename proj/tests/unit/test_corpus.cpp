// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dualtrain/corpus.hpp"
#include "stubs.hpp"
#include "temp_dir.hpp"

using namespace dualtrain;
namespace fs = std::filesystem;

TEST_CASE("tokenize lowercases ASCII and strips edge punctuation")
{
    CHECK(corpus::tokenize("What IS the State-of-the-Art?") ==
          std::vector<std::string>{"what", "is", "the", "state-of-the-art"});
    CHECK(corpus::tokenize("  don't \t(stop)  ") == std::vector<std::string>{"don't", "stop"});
    CHECK(corpus::tokenize("... ?? !").empty());
    CHECK(corpus::tokenize("").empty());
}

TEST_CASE("tokenize splits on Unicode whitespace and keeps other bytes")
{
    // U+00A0 no-break space and U+3000 ideographic space
    CHECK(corpus::tokenize("a\xC2\xA0" "b\xE3\x80\x80" "c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(corpus::tokenize("\xC3\x89t\xC3\xA9") == std::vector<std::string>{"\xC3\x89t\xC3\xA9"});
}

TEST_CASE("join inverts tokenize on normalized text")
{
    const auto t = corpus::tokenize("how does dropout work");
    CHECK(corpus::join(t) == "how does dropout work");
}

TEST_CASE("make_passage derives the token count and rejects blank text")
{
    const auto p = corpus::make_passage("p1", "Gradient descent, step by step.");
    CHECK(p.token_count == 5);
    CHECK_THROWS_AS(corpus::make_passage("p2", "   "), corpus::CorpusError);
}

TEST_CASE("write_bundle and load_corpus round-trip")
{
    TempDir dir;
    const auto bundle = testing::toy_bundle(10, 3);
    corpus::write_bundle(bundle, dir.path());
    const auto manifest = corpus::Manifest::read(dir.path() / "manifest.json");
    const auto loaded = corpus::load_corpus(dir.path(), manifest);
    CHECK(loaded == bundle);
    CHECK(corpus::validate(loaded).ok());
}

TEST_CASE("write_bundle output is a pure function of the bundle")
{
    TempDir a;
    TempDir b;
    corpus::write_bundle(testing::toy_bundle(), a.path());
    corpus::write_bundle(testing::toy_bundle(), b.path());
    for (const auto& entry : fs::directory_iterator(a.path())) {
        CHECK(read_file(entry.path()) == read_file(b.path() / entry.path().filename()));
    }
}

TEST_CASE("records without ids get file:line ids")
{
    TempDir dir;
    corpus::write_bundle(testing::toy_bundle(3, 1), dir.path());
    write_file(dir.path() / "target_passages.jsonl", "{\"text\":\"alpha beta\"}\n\n{\"text\":\"gamma\"}\n");
    const auto loaded = corpus::load_corpus(dir.path(), corpus::Manifest::read(dir.path() / "manifest.json"));
    REQUIRE(loaded.target_passages.size() == 2);
    CHECK(loaded.target_passages[0].id == "target_passages.jsonl:1");
    CHECK(loaded.target_passages[1].id == "target_passages.jsonl:3");
}

TEST_CASE("malformed corpus lines report file and line")
{
    TempDir dir;
    corpus::write_bundle(testing::toy_bundle(3, 1), dir.path());
    write_file(dir.path() / "target_questions.jsonl", "{\"id\":\"a\",\"text\":\"ok\"}\n{\"id\":\"b\",\"text\":\n");
    try {
        corpus::load_corpus(dir.path(), corpus::Manifest::read(dir.path() / "manifest.json"));
        FAIL("expected CorpusError");
    } catch (const corpus::CorpusError& e) {
        CHECK(e.file() == "target_questions.jsonl");
        CHECK(e.line() == 2);
    }
}

TEST_CASE("duplicate ids and blank text are rejected")
{
    TempDir dir;
    corpus::write_bundle(testing::toy_bundle(3, 1), dir.path());
    const auto manifest = corpus::Manifest::read(dir.path() / "manifest.json");
    write_file(dir.path() / "target_passages.jsonl", "{\"id\":\"x\",\"text\":\"a\"}\n{\"id\":\"x\",\"text\":\"b\"}\n");
    CHECK_THROWS_AS(corpus::load_corpus(dir.path(), manifest), corpus::CorpusError);
    write_file(dir.path() / "target_passages.jsonl", "{\"id\":\"x\",\"text\":\" \"}\n");
    CHECK_THROWS_AS(corpus::load_corpus(dir.path(), manifest), corpus::CorpusError);
}

TEST_CASE("manifest rejects unknown and missing keys")
{
    CHECK_THROWS_AS(corpus::Manifest::from_json({{"bogus", "x"}}), corpus::CorpusError);
    CHECK_THROWS_AS(corpus::Manifest::from_json({{"source_pairs", "x"}}), corpus::CorpusError);
}

TEST_CASE("validate flags duplicate ids")
{
    auto bundle = testing::toy_bundle(4, 1);
    bundle.target_questions.push_back(bundle.target_questions.front());
    const auto report = corpus::validate(bundle);
    CHECK_FALSE(report.ok());
}

TEST_CASE("sample is deterministic and without replacement")
{
    std::vector<int> items(50);
    for (int i = 0; i < 50; ++i) {
        items[static_cast<std::size_t>(i)] = i;
    }
    const auto a = corpus::sample(items, 20, 7);
    CHECK(a == corpus::sample(items, 20, 7));
    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    CHECK_THROWS_AS(corpus::sample(items, 51, 7), std::invalid_argument);
}
