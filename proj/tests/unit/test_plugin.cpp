// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <chrono>
#include <string>

#include "dualtrain/corpus.hpp"
#include "dualtrain/plugin.hpp"

using namespace dualtrain;
using namespace std::chrono_literals;

namespace {

std::string fake(const std::string& mode)
{
    return std::string(DUALTRAIN_FAKE_PLUGIN) + " " + mode;
}

models::PluginOptions quick()
{
    models::PluginOptions o;
    o.handshake_timeout = 2000ms;
    o.request_timeout = 2000ms;
    return o;
}

}  // namespace

TEST_CASE("plugin generator handshake, generate and score")
{
    auto gen = models::attach_generator(fake("gen"), quick());
    CHECK(gen->name() == "plugin:fake-gen");
    CHECK(gen->can_score());
    const auto g = gen->generate("dropout zeroes units", {});
    CHECK(g.question == "what is dropout?");
    CHECK(gen->score("p", "abcd") == doctest::Approx(-0.4));
    const std::vector<models::QgPair> pairs{{"p", "q"}};
    CHECK_NOTHROW(gen->fine_tune(pairs));
    auto copy = gen->clone();
    CHECK(copy->generate("kernels map", {}).question == "what is kernels?");
}

TEST_CASE("plugin retriever ranks with native similarity and id tie-break")
{
    auto ret = models::attach_retriever(fake("ret"), quick());
    CHECK(ret->trainable());
    const std::vector<corpus::Passage> pool{corpus::make_passage("b", "xyz"), corpus::make_passage("a", "xyz"),
                                            corpus::make_passage("c", "q")};
    ret->index(pool);
    const auto hits = ret->retrieve("xyz", 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].id == "a");
    CHECK(hits[1].id == "b");
    CHECK(hits[0].score == doctest::Approx(ret->score("xyz", "xyz")));
}

TEST_CASE("plugin failures surface as PluginError")
{
    CHECK_THROWS_AS(models::attach_generator(fake("badjson"), quick()), models::PluginError);
    models::PluginOptions o = quick();
    o.handshake_timeout = 300ms;
    CHECK_THROWS_AS(models::attach_generator(fake("silent"), o), models::PluginError);
    CHECK_THROWS_AS(models::attach_generator(fake("ret"), quick()), models::PluginError);
    CHECK_THROWS_AS(models::attach_generator("/nonexistent/plugin-binary", quick()), models::PluginError);
    auto failing = models::attach_generator(fake("error"), quick());
    CHECK_THROWS_AS(failing->generate("p", {}), models::PluginError);
}

TEST_CASE("PluginError keeps the offending payload")
{
    try {
        models::attach_generator(fake("badjson"), quick());
        FAIL("expected PluginError");
    } catch (const models::PluginError& e) {
        CHECK(e.payload().find("{not json") != std::string::npos);
    }
}
