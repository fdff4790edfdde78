// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>

#include "dualtrain/filters.hpp"
#include "dualtrain/rng.hpp"
#include "stubs.hpp"

using namespace dualtrain;
using filters::Critic;
using filters::FilterKind;

TEST_CASE("select_by_fraction keeps exactly ceil(f n) of the highest scores")
{
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(60);
        std::vector<double> scores(n);
        for (auto& s : scores) {
            // coarse values force ties
            s = static_cast<double>(rng.below(10));
        }
        for (const double f : {0.25, 0.5, 0.75, 1.0}) {
            const auto sel = filters::select_by_fraction(scores, f);
            const auto expected = static_cast<std::size_t>(std::ceil(f * static_cast<double>(n)));
            CHECK(static_cast<std::size_t>(std::count(sel.kept.begin(), sel.kept.end(), true)) == expected);
            double min_kept = std::numeric_limits<double>::infinity();
            double max_dropped = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                if (sel.kept[i]) {
                    min_kept = std::min(min_kept, scores[i]);
                } else {
                    max_dropped = std::max(max_dropped, scores[i]);
                }
            }
            CHECK(min_kept >= max_dropped);
            CHECK(sel.threshold == min_kept);
        }
    }
}

TEST_CASE("ties at the cut keep the lower indices")
{
    const std::vector<double> scores{1.0, 2.0, 2.0, 2.0};
    const auto sel = filters::select_by_fraction(scores, 0.5);
    CHECK(sel.kept == std::vector<bool>{false, true, true, false});
    CHECK(sel.threshold == 2.0);
}

TEST_CASE("fraction and threshold selection validate inputs")
{
    CHECK_THROWS(filters::select_by_fraction(std::vector<double>{}, 0.5));
    const std::vector<double> s{1.0};
    CHECK_THROWS(filters::select_by_fraction(s, 0.0));
    CHECK_THROWS(filters::select_by_fraction(s, 1.5));
    const std::vector<double> scores{0.1, 0.5, 0.9};
    CHECK(filters::select_by_threshold(scores, 0.5).kept == std::vector<bool>{false, true, true});
}

TEST_CASE("critic assignment follows the filter kind")
{
    using augment::Task;
    CHECK(filters::critic_for(FilterKind::self_consistency, Task::qg) == Critic::generator);
    CHECK(filters::critic_for(FilterKind::self_consistency, Task::ir) == Critic::retriever);
    CHECK(filters::critic_for(FilterKind::cross_consistency, Task::qg) == Critic::retriever);
    CHECK(filters::critic_for(FilterKind::cross_consistency, Task::ir) == Critic::generator);
}

TEST_CASE("policy JSON round-trip and validation")
{
    filters::FilterPolicy p;
    p.kind = FilterKind::cross_consistency;
    p.accept_fraction = 0.5;
    p.absolute.retriever = 3.0;
    CHECK(filters::FilterPolicy::from_json(p.to_json()) == p);
    CHECK(filters::parse_filter_kind("self") == FilterKind::self_consistency);
    CHECK(filters::parse_filter_kind("cross_consistency") == FilterKind::cross_consistency);
    CHECK_THROWS(filters::parse_filter_kind("both"));
    p.accept_fraction = 0.0;
    CHECK_THROWS(p.validate());
}

TEST_CASE("neural operating points are the published constants")
{
    CHECK(filters::neural_self_consistency.generator == -1.19);
    CHECK(filters::neural_self_consistency.retriever == 78.24);
    CHECK(filters::neural_cross_consistency.generator == -5.95);
    CHECK(filters::neural_cross_consistency.retriever == 71.65);
}

namespace {

std::vector<augment::SyntheticExample> make_set(augment::Task task, std::size_t n)
{
    std::vector<augment::SyntheticExample> out;
    for (std::size_t i = 0; i < n; ++i) {
        augment::SyntheticExample e;
        e.task = task;
        e.input_text = task == augment::Task::qg ? "passage words here" : std::string(i + 1, 'q');
        e.output_text = task == augment::Task::qg ? std::string(i + 1, 'q') : "passage words here";
        e.source_passage_id = "p";
        out.push_back(e);
    }
    return out;
}

}  // namespace

TEST_CASE("apply_filter scores missing fields and reports the kept share")
{
    testing::StubGenerator gen;
    testing::StubRetriever ret;
    auto sg = make_set(augment::Task::qg, 8);
    auto sr = make_set(augment::Task::ir, 4);
    filters::FilterPolicy policy;
    policy.kind = FilterKind::self_consistency;
    policy.accept_fraction = 0.75;
    const auto result = filters::apply_filter(policy, sg, sr, gen, ret, 1);
    REQUIRE(result.generator_set);
    REQUIRE(result.retriever_set);
    CHECK(result.generator_set->critic == Critic::generator);
    CHECK(result.generator_set->n_in == 8);
    CHECK(result.generator_set->n_kept == 6);
    CHECK(result.retriever_set->n_kept == 3);
    for (const auto& e : sg) {
        CHECK(e.gen_loglik.has_value());
    }
    // every generated "question" is one token, so all generator scores tie at -1
    CHECK(sg[6].kept == false);
    CHECK(sg[7].kept == false);
}

TEST_CASE("filter kind none keeps everything and reports a null threshold")
{
    testing::StubGenerator gen;
    testing::StubRetriever ret;
    auto sg = make_set(augment::Task::qg, 3);
    std::vector<augment::SyntheticExample> sr;
    const auto result = filters::apply_filter({}, sg, sr, gen, ret, 1);
    REQUIRE(result.generator_set);
    CHECK_FALSE(result.retriever_set);
    CHECK(result.generator_set->n_kept == 3);
    CHECK(result.generator_set->to_json()["threshold"].is_null());
}

TEST_CASE("an absolute threshold replaces the fraction for its critic")
{
    testing::StubGenerator gen;
    testing::StubRetriever ret;
    std::vector<augment::SyntheticExample> sg;
    auto sr = make_set(augment::Task::ir, 5);
    for (std::size_t i = 0; i < sr.size(); ++i) {
        sr[i].ret_sim = static_cast<double>(i);
    }
    filters::FilterPolicy policy;
    policy.kind = FilterKind::self_consistency;
    policy.absolute.retriever = 2.5;
    const auto result = filters::apply_filter(policy, sg, sr, gen, ret, 1);
    REQUIRE(result.retriever_set);
    CHECK(result.retriever_set->n_kept == 2);
    CHECK(result.retriever_set->threshold == 2.5);
}
