// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include <fmt/format.h>

#include "dualtrain/domain_filter.hpp"
#include "dualtrain/rng.hpp"

using namespace dualtrain;
using analysis::DomainLabel;

namespace {

std::vector<analysis::LabeledQuestion> separable(std::size_t n, std::uint64_t seed)
{
    const std::vector<std::string> ml{"gradient", "dropout", "kernel", "embedding", "optimizer", "loss", "neural"};
    const std::vector<std::string> trivia{"river", "castle", "king", "city", "painter", "war", "island"};
    Rng rng(seed);
    std::vector<analysis::LabeledQuestion> out;
    for (std::size_t i = 0; i < n; ++i) {
        const bool in = i % 2 == 0;
        const auto& words = in ? ml : trivia;
        const auto text = fmt::format("what is the {} of the {}?", words[rng.below(words.size())],
                                      words[rng.below(words.size())]);
        out.push_back({corpus::make_question(fmt::format("q{}", i), text), in ? DomainLabel::in_domain : DomainLabel::ood});
    }
    return out;
}

}  // namespace

TEST_CASE("hashed bag of words is L2 normalized and deterministic")
{
    analysis::HashedBagOfWords f;
    CHECK(f.id() == "hashed-bow-32768");
    CHECK(f.dimension() == 32768);
    const auto x = f.extract("the cat the dog");
    double norm = 0.0;
    for (const auto& [i, v] : x) {
        CHECK(i < f.dimension());
        norm += v * v;
    }
    CHECK(norm == doctest::Approx(1.0));
    CHECK(f.extract("the cat the dog") == x);
}

TEST_CASE("domain filter separates a separable corpus")
{
    const auto train = separable(400, 1);
    const auto held = separable(200, 2);
    const auto model = analysis::train_domain_filter(train, {});
    CHECK(model.alpha == 0.8);
    std::size_t correct = 0;
    for (const auto& l : held) {
        correct += (model.probability(l.question.text) >= 0.5) == (l.label == DomainLabel::in_domain) ? 1 : 0;
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(held.size()) >= 0.95);
}

TEST_CASE("training is deterministic and needs both labels")
{
    const auto train = separable(60, 3);
    const auto a = analysis::train_domain_filter(train, {});
    const auto b = analysis::train_domain_filter(train, {});
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
    std::vector<analysis::LabeledQuestion> one_class(train.begin(), train.begin() + 1);
    CHECK_THROWS_AS(analysis::train_domain_filter(one_class, {}), std::invalid_argument);
}

TEST_CASE("accepted set shrinks as alpha rises and PR points match brute force")
{
    const auto train = separable(200, 5);
    const auto held = separable(80, 6);
    const auto model = analysis::train_domain_filter(train, {});
    std::vector<corpus::Question> questions;
    std::vector<DomainLabel> labels;
    for (const auto& l : held) {
        questions.push_back(l.question);
        labels.push_back(l.label);
    }
    std::size_t prev = questions.size() + 1;
    for (int i = 0; i <= 100; ++i) {
        const auto r = analysis::apply_domain_filter(model, questions, i / 100.0);
        CHECK(r.accepted.size() <= prev);
        CHECK(r.accepted.size() + r.rejected.size() == questions.size());
        prev = r.accepted.size();
    }
    const auto grid = analysis::default_threshold_grid();
    REQUIRE(grid.size() == 21);
    const auto r = analysis::apply_domain_filter(model, questions, 0.8, labels);
    REQUIRE(r.pr_curve.size() == grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::size_t tp = 0;
        std::size_t fp = 0;
        std::size_t fn = 0;
        for (std::size_t i = 0; i < questions.size(); ++i) {
            const bool accepted = model.probability(questions[i].text) >= grid[g];
            const bool in = labels[i] == DomainLabel::in_domain;
            tp += accepted && in ? 1 : 0;
            fp += accepted && !in ? 1 : 0;
            fn += !accepted && in ? 1 : 0;
        }
        CHECK(r.pr_curve[g].tp == tp);
        CHECK(r.pr_curve[g].fp == fp);
        CHECK(r.pr_curve[g].fn == fn);
    }
}

TEST_CASE("PR curve CSV header")
{
    const std::vector<analysis::PrPoint> curve{{0.5, 1.0, 0.25, 1, 0, 3}};
    CHECK(analysis::pr_curve_csv(curve) == "threshold,precision,recall\n0.50,1.000000,0.250000\n");
}
