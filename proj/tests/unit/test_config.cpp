// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <string>

#include "dualtrain/config.hpp"

using namespace dualtrain;
using config::ConfigError;
using config::RunConfig;
using nlohmann::json;

namespace {

std::string error_of(const json& j)
{
    try {
        RunConfig::from_json(j).validate();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("an empty config is complete")
{
    const auto c = RunConfig::from_json(json::object());
    CHECK(c.negatives_k == 7);
    CHECK(c.max_iters == 2);
    CHECK(c.encoder_dim == 64);
    CHECK(c.train.epochs == 5);
    CHECK(c.train.batch == 32);
    CHECK(c.train.lr == 1e-5);
    CHECK(c.decode.top_k == 50);
    CHECK(c.decode.seed == c.seed);
    CHECK(c.filter.accept_fraction == 0.75);
    CHECK(c.analysis.domain_alpha == 0.8);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("to_json reproduces the effective config")
{
    auto c = RunConfig::from_json({{"seed", 5}, {"filter", {{"kind", "cross"}}}, {"adapt", {{"mode", "self"}}}});
    CHECK(c.decode.seed == 5);
    const auto again = RunConfig::from_json(c.to_json());
    CHECK(again.to_json() == c.to_json());
    CHECK(again.filter.kind == filters::FilterKind::cross_consistency);
    CHECK(again.adapt.mode == augment::Direction::self);
}

TEST_CASE("errors name the offending field path")
{
    CHECK(error_of({{"decode", {{"foo", 1}}}}).find("decode.foo") != std::string::npos);
    CHECK(error_of({{"negatives_k", 0}}).find("negatives_k") != std::string::npos);
    CHECK(error_of({{"train", {{"epochs", "five"}}}}).find("train.epochs") != std::string::npos);
    CHECK(error_of({{"filter", {{"accept_fraction", 1.5}}}}).find("filter") != std::string::npos);
    CHECK(error_of({{"models", {{"retriever", "tfidf"}}}}).find("models.retriever") != std::string::npos);
    CHECK_FALSE(error_of({{"bogus", 1}}).empty());
    CHECK(error_of(json::object()).empty());
}

TEST_CASE("model factories follow the backends")
{
    auto c = RunConfig::from_json({{"models", {{"retriever", "native-bm25"}}}});
    CHECK(config::make_retriever(c)->name() == "bm25");
    CHECK(config::make_generator(c)->name() == "ngram_copy");
    c = RunConfig::from_json(json::object());
    CHECK(config::make_retriever(c)->name() == "dual_encoder");
}

TEST_CASE("adapt_config copies the run settings")
{
    auto c = RunConfig::from_json({{"max_iters", 4}, {"negatives_k", 3}, {"adapt", {{"task", "ir"}}}});
    const auto a = config::adapt_config(c, 2);
    CHECK(a.max_iters == 4);
    CHECK(a.negatives_k == 3);
    CHECK(a.task == augment::AdaptTask::ir);
    CHECK(a.threads == 2);
    CHECK(a.dev_k == 40);
}
