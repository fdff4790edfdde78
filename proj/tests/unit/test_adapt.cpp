// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <vector>

#include "dualtrain/adapt.hpp"
#include "dualtrain/evaluation.hpp"
#include "stubs.hpp"

using namespace dualtrain;
using augment::AdaptTask;

namespace {

constexpr std::size_t n_target = 12;

augment::DevMetricFn sequence(std::vector<double> qg, std::vector<double> ir = {})
{
    return [qg, ir](const models::GeneratorModel&, models::RetrieverModel&, std::size_t t) {
        augment::DevScores s;
        if (!qg.empty()) {
            s.qg = qg.at(t - 1);
        }
        if (!ir.empty()) {
            s.ir = ir.at(t - 1);
        }
        return s;
    };
}

augment::AdaptResult run(AdaptTask task, std::size_t max_iters, const augment::DevMetricFn& dev,
                         augment::Direction mode = augment::Direction::back)
{
    augment::AdaptConfig cfg;
    cfg.mode = mode;
    cfg.task = task;
    cfg.max_iters = max_iters;
    cfg.threads = 1;
    const auto bundle = testing::toy_bundle(n_target, 3);
    return augment::adapt(cfg, bundle, testing::StubGenerator{}, testing::StubRetriever{}, dev);
}

std::size_t generator_updates(const augment::AdaptResult& r)
{
    return dynamic_cast<const testing::StubGenerator&>(*r.generator).trained;
}

}  // namespace

TEST_CASE("a drop after a gain returns the previous iteration")
{
    const auto r = run(AdaptTask::qg, 10, sequence({10, 12, 11}));
    REQUIRE(r.history.iterations.size() == 3);
    CHECK(r.history.best_t == 2);
    CHECK(r.history.net_gain == 2.0);
    CHECK(r.history.iterations[1].best);
    CHECK_FALSE(r.history.iterations[2].best);
    // one fine-tuning pass over the back-training set per kept iteration
    CHECK(generator_updates(r) == 2 * n_target);
}

TEST_CASE("an immediate drop keeps the first iteration with zero net gain")
{
    const auto r = run(AdaptTask::qg, 10, sequence({10, 9}));
    REQUIRE(r.history.iterations.size() == 2);
    CHECK(r.history.best_t == 1);
    CHECK(r.history.net_gain == 0.0);
    CHECK(generator_updates(r) == n_target);
}

TEST_CASE("max_iters bounds a monotone run")
{
    const auto r = run(AdaptTask::qg, 3, sequence({1, 2, 3, 4}));
    CHECK(r.history.iterations.size() == 3);
    CHECK(r.history.best_t == 3);
    CHECK(r.history.net_gain == 2.0);
}

TEST_CASE("equal dev scores do not stop the loop")
{
    const auto r = run(AdaptTask::qg, 3, sequence({5, 5, 5}));
    CHECK(r.history.iterations.size() == 3);
    CHECK(r.history.best_t == 3);
}

TEST_CASE("task both stops when either metric drops")
{
    const auto r = run(AdaptTask::both, 10, sequence({10, 12, 13}, {50, 51, 49}));
    REQUIRE(r.history.iterations.size() == 3);
    CHECK(r.history.best_t == 2);
    CHECK(r.history.iterations[0].dev_metric == 30.0);
    CHECK(r.history.net_gain == doctest::Approx(1.5));
}

TEST_CASE("iteration records describe the synthetic sets")
{
    const auto r = run(AdaptTask::ir, 1, sequence({}, {7}));
    REQUIRE(r.history.iterations.size() == 1);
    const auto& it = r.history.iterations[0];
    CHECK(it.sg_size == n_target);
    CHECK(it.sr_size == n_target);
    CHECK(it.kept_frac_g == 1.0);
    CHECK(r.synthetic.size() == 2 * n_target);
    const auto j = r.history.to_json();
    CHECK(j["best_t"] == 1);
    CHECK_FALSE(j["iterations"][0].contains("wall_seconds"));
    CHECK(r.qg_trajectory.points().size() == 2);
    CHECK(r.ir_trajectory.points().size() == 2);
}

TEST_CASE("self-training mode builds sets from the natural inputs")
{
    const auto r = run(AdaptTask::qg, 1, sequence({1}), augment::Direction::self);
    for (const auto& e : r.synthetic) {
        CHECK(e.direction == augment::Direction::self);
    }
}

TEST_CASE("adapt rejects an empty dev split and zero iterations")
{
    augment::AdaptConfig cfg;
    cfg.threads = 1;
    auto bundle = testing::toy_bundle(4, 1);
    bundle.dev_pairs.clear();
    CHECK_THROWS_AS(augment::adapt(cfg, bundle, testing::StubGenerator{}, testing::StubRetriever{}),
                    eval::EmptySplitError);
    cfg.max_iters = 0;
    CHECK_THROWS(augment::adapt(cfg, testing::toy_bundle(4, 1), testing::StubGenerator{}, testing::StubRetriever{}));
}

TEST_CASE("adapt leaves the input models untouched")
{
    testing::StubGenerator gen;
    testing::StubRetriever ret;
    augment::AdaptConfig cfg;
    cfg.threads = 1;
    cfg.task = AdaptTask::qg;
    augment::adapt(cfg, testing::toy_bundle(6, 2), gen, ret, sequence({1, 2}));
    CHECK(gen.trained == 0);
    CHECK(ret.trained == 0);
    CHECK_FALSE(ret.indexed());
}

TEST_CASE("mined retrieval examples exclude the gold passage")
{
    const auto bundle = testing::toy_bundle(8, 1);
    const auto pool = augment::unique_passages(bundle.source_pairs);
    CHECK(pool.size() == 8);
    const auto examples = augment::mined_retrieval_examples(bundle.source_pairs, pool, 3);
    REQUIRE(examples.size() == 8);
    for (const auto& e : examples) {
        CHECK(e.negatives.size() == 3);
        CHECK(std::find(e.negatives.begin(), e.negatives.end(), e.positive) == e.negatives.end());
    }
}
