// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dualtrain/analysis.hpp"
#include "dualtrain/rng.hpp"
#include "stubs.hpp"

using namespace dualtrain;

namespace {

/// Brute-force nearest rank: smallest value v with #(x <= v) >= p n.
double nearest_rank_oracle(std::vector<double> xs, double p)
{
    std::sort(xs.begin(), xs.end());
    for (const double v : xs) {
        const auto at_most = static_cast<double>(std::count_if(xs.begin(), xs.end(), [&](double x) { return x <= v; }));
        if (at_most >= p * static_cast<double>(xs.size())) {
            return v;
        }
    }
    return xs.back();
}

}  // namespace

TEST_CASE("summaries of small fixed inputs")
{
    const std::vector<double> ones{1, 1, 1, 1};
    const auto a = analysis::summarize_scores(ones);
    CHECK(a.mean == 1.0);
    CHECK(a.variance == 0.0);
    CHECK(a.q1 == 1.0);
    CHECK(a.q2 == 1.0);
    CHECK(a.q3 == 1.0);
    REQUIRE(a.histogram.size() == 20);
    CHECK(a.histogram[0].count == 4);

    const std::vector<double> ramp{1, 2, 3, 4};
    const auto b = analysis::summarize_scores(ramp);
    CHECK(b.mean == 2.5);
    CHECK(b.variance == 1.25);
    CHECK(b.q2 == 2.0);
    CHECK_THROWS(analysis::summarize_scores(std::vector<double>{}));
}

TEST_CASE("quartiles match the nearest-rank oracle and histograms cover every score")
{
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> xs(1 + rng.below(40));
        for (auto& x : xs) {
            x = static_cast<double>(rng.below(20)) - 5.0;
        }
        const auto s = analysis::summarize_scores(xs, 7);
        CHECK(s.q1 == nearest_rank_oracle(xs, 0.25));
        CHECK(s.q2 == nearest_rank_oracle(xs, 0.5));
        CHECK(s.q3 == nearest_rank_oracle(xs, 0.75));
        CHECK(s.q1 <= s.q2);
        CHECK(s.q2 <= s.q3);
        std::size_t total = 0;
        for (const auto& bin : s.histogram) {
            total += bin.count;
        }
        CHECK(total == xs.size());
    }
}

TEST_CASE("ordering report compares mean and variance")
{
    std::vector<double> self(40);
    std::vector<double> back(40);
    for (std::size_t i = 0; i < 40; ++i) {
        self[i] = 5.0 + static_cast<double>(i % 2);
        back[i] = static_cast<double>(i % 8);
    }
    const auto r = analysis::compare_self_vs_back(self, back);
    CHECK(r.self_mean_higher);
    CHECK(r.self_variance_lower);
    CHECK_FALSE(r.insufficient);
    const auto small = analysis::compare_self_vs_back(std::vector<double>(5, 1.0), back);
    CHECK(small.insufficient);
    CHECK_FALSE(small.self_mean_higher);
}

TEST_CASE("perplexity is exp of the logged per-token NLL")
{
    Rng rng(2);
    analysis::TrajectoryLog log;
    for (std::size_t step = 0; step < 20; ++step) {
        analysis::NllTotals nll{rng.uniform() * 500.0, 1 + rng.below(300)};
        log.append({step, rng.uniform(), rng.uniform(), nll});
    }
    for (const auto& p : log.points()) {
        REQUIRE(p.perplexity().has_value());
        CHECK(std::abs(*p.perplexity() - std::exp(p.eval_nll->nll / static_cast<double>(p.eval_nll->tokens))) < 1e-9);
    }
    CHECK_THROWS(log.append({5, 0.0, std::nullopt, std::nullopt}));
}

TEST_CASE("trajectory CSV layout")
{
    analysis::TrajectoryLog log;
    log.append({0, 1.5, std::nullopt, std::nullopt});
    log.append({1, 1.25, 2.0, analysis::NllTotals{0.0, 4}});
    CHECK(log.to_csv() == "step,train_loss,eval_loss,ppl\n0,1.5,,\n1,1.25,2,1\n");
}

TEST_CASE("corpus_nll sums negative scores and scored lengths")
{
    testing::StubGenerator gen;
    const std::vector<models::QgPair> pairs{{"p", "a b"}, {"p", "c"}};
    const auto totals = analysis::corpus_nll(gen, pairs, 1);
    CHECK(totals.nll == 3.0);
    CHECK(totals.tokens == 5);
    CHECK(totals.per_token() == doctest::Approx(0.6));
}
