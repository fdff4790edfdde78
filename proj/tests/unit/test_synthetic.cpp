// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>

#include "dualtrain/synthetic.hpp"
#include "stubs.hpp"
#include "temp_dir.hpp"

using namespace dualtrain;
using augment::Direction;
using augment::Task;

namespace {

struct Fixture {
    corpus::CorpusBundle bundle = testing::toy_bundle(12, 2);
    testing::StubGenerator gen;
    testing::StubRetriever ret;

    Fixture() { ret.index(bundle.target_passages); }

    std::vector<augment::SyntheticExample> build(Direction d, Task t, unsigned threads = 1)
    {
        return augment::build_synthetic(d, t, gen, ret, bundle.target_passages, bundle.target_questions, {}, threads);
    }
};

}  // namespace

TEST_CASE("each direction and task draws its natural side from the target corpus")
{
    Fixture f;
    std::set<std::string> passages;
    std::set<std::string> questions;
    for (const auto& p : f.bundle.target_passages) {
        passages.insert(p.text);
    }
    for (const auto& q : f.bundle.target_questions) {
        questions.insert(q.text);
    }

    // self: the input is natural; back: the output is natural
    for (const auto& e : f.build(Direction::self, Task::qg)) {
        CHECK(passages.contains(e.input_text));
        CHECK(e.source_passage_id.has_value());
    }
    for (const auto& e : f.build(Direction::self, Task::ir)) {
        CHECK(questions.contains(e.input_text));
        CHECK(passages.contains(e.output_text));
    }
    for (const auto& e : f.build(Direction::back, Task::qg)) {
        CHECK(questions.contains(e.output_text));
        CHECK(passages.contains(e.input_text));
        CHECK(e.source_question_id.has_value());
    }
    for (const auto& e : f.build(Direction::back, Task::ir)) {
        CHECK(passages.contains(e.output_text));
        CHECK_FALSE(questions.contains(e.input_text));
    }
    CHECK(f.build(Direction::self, Task::qg).size() == f.bundle.target_passages.size());
    CHECK(f.build(Direction::back, Task::qg).size() == f.bundle.target_questions.size());
}

TEST_CASE("synthetic sets carry both critic scores and are thread-count independent")
{
    Fixture f;
    const auto one = f.build(Direction::back, Task::ir, 1);
    const auto four = f.build(Direction::back, Task::ir, 4);
    CHECK(one == four);
    for (const auto& e : one) {
        CHECK(e.gen_loglik.has_value());
        CHECK(e.ret_sim.has_value());
        CHECK(*e.gen_loglik == f.gen.score(e.passage(), e.question()));
        CHECK(*e.ret_sim == f.ret.score(e.question(), e.passage()));
    }
}

TEST_CASE("retrieval-based synthesis needs an indexed retriever")
{
    Fixture f;
    testing::StubRetriever empty;
    CHECK_THROWS_AS(augment::build_synthetic(Direction::self, Task::ir, f.gen, empty, f.bundle.target_passages,
                                             f.bundle.target_questions, {}),
                    models::ModelError);
}

TEST_CASE("synthetic JSONL round-trip")
{
    Fixture f;
    auto set = f.build(Direction::self, Task::qg);
    set[1].kept = false;
    set[2].ret_sim.reset();
    TempDir dir;
    augment::export_synthetic(set, dir.path() / "s.jsonl");
    CHECK(augment::import_synthetic(dir.path() / "s.jsonl") == set);
    CHECK(augment::kept_qg_pairs(set).size() == set.size() - 1);
}

TEST_CASE("synthetic JSON parsing rejects bad records")
{
    augment::SyntheticExample e;
    e.input_text = "p";
    e.output_text = "q";
    e.source_passage_id = "p1";
    nlohmann::json j = augment::to_json(e);
    CHECK_NOTHROW(augment::synthetic_from_json(j));
    auto no_id = j;
    no_id["src_passage_id"] = nullptr;
    no_id["src_question_id"] = nullptr;
    CHECK_THROWS(augment::synthetic_from_json(no_id));
    auto bad_task = j;
    bad_task["task"] = "summarize";
    CHECK_THROWS(augment::synthetic_from_json(bad_task));
}

TEST_CASE("task and direction names parse back")
{
    CHECK(augment::parse_task(augment::to_string(Task::ir)) == Task::ir);
    CHECK(augment::parse_direction(augment::to_string(Direction::back)) == Direction::back);
    CHECK_THROWS_AS(augment::parse_direction("sideways"), std::invalid_argument);
}
