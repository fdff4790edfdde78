// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dualtrain/rng.hpp"
#include "dualtrain/taxonomy.hpp"

using namespace dualtrain;
using analysis::QuestionClass;

TEST_CASE("published taxonomy examples classify to their classes")
{
    CHECK(analysis::classify_question("What is supervised learning with example?") == QuestionClass::description);
    CHECK(analysis::classify_question("How do you compute vectors in Word2Vec?") == QuestionClass::method);
    CHECK(analysis::classify_question("Why does ReLU activation work so surprisingly well?") ==
          QuestionClass::explanation);
    CHECK(analysis::classify_question("What is the difference between LDA and PCA?") == QuestionClass::comparison);
    CHECK(analysis::classify_question("Is language acquisition innate or learned?") == QuestionClass::preference);
}

TEST_CASE("comparison wins over every other rule")
{
    CHECK(analysis::classify_question("why is there a difference between l1 and l2?") == QuestionClass::comparison);
    CHECK(analysis::classify_question("how do svm vs logistic regression behave?") == QuestionClass::comparison);
    CHECK(analysis::classify_question("Compare adam and sgd") == QuestionClass::comparison);
    CHECK(analysis::classify_question("Who invented the perceptron?") == QuestionClass::description);
    CHECK(analysis::classify_question("") == QuestionClass::description);
}

TEST_CASE("preference words are configurable")
{
    analysis::TaxonomyRules rules;
    rules.preference_words = {"is"};
    CHECK(analysis::classify_question("Should I normalize inputs?", rules) == QuestionClass::description);
    CHECK(analysis::classify_question("Should I normalize inputs?") == QuestionClass::preference);
}

TEST_CASE("confusion rows sum to 100 percent")
{
    const std::vector<std::string> pool{"what is x?", "how do i y?", "why z?", "is a better?",
                                        "what is the difference between a and b?"};
    Rng rng(4);
    std::vector<std::string> gold;
    std::vector<std::string> generated;
    for (int i = 0; i < 200; ++i) {
        gold.push_back(pool[rng.below(pool.size())]);
        generated.push_back(pool[rng.below(pool.size())]);
    }
    const auto m = analysis::taxonomy_confusion(gold, generated);
    for (std::size_t c = 0; c < analysis::question_class_count; ++c) {
        const auto cls = static_cast<QuestionClass>(c);
        if (m.row_total(cls) == 0) {
            continue;
        }
        double sum = 0.0;
        for (const double v : m.row_percent(cls)) {
            sum += v;
        }
        CHECK(std::abs(sum - 100.0) < 1e-9);
    }
    CHECK_THROWS_AS(analysis::taxonomy_confusion(gold, std::vector<std::string>{}), std::invalid_argument);
}

TEST_CASE("confusion CSV layout")
{
    const std::vector<std::string> gold{"why a?", "why b?"};
    const std::vector<std::string> generated{"why a?", "what is b?"};
    const auto csv = analysis::taxonomy_confusion(gold, generated).to_csv();
    CHECK(csv == "gold,D,C,E,M,P\nD,,,,,\nC,,,,,\nE,50.00,0.00,50.00,0.00,0.00\nM,,,,,\nP,,,,,\n");
    CHECK(analysis::abbreviation(QuestionClass::preference) == 'P');
}
