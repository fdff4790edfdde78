// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include "dualtrain/corpus.hpp"

namespace dualtrain::fixture {

struct DeskCorpusOptions {
    std::size_t source_pairs = 1000;
    std::size_t target_passages = 1000;
    std::size_t target_questions = 1000;
    std::size_t dev_pairs = 100;
    std::size_t test_pairs = 100;
    std::uint64_t seed = 2021;
};

/// Deterministic two-domain corpus built from templates. The source side
/// resembles open-domain trivia (places, people, events) and is dominated by
/// descriptive wh-questions; the target side covers machine-learning concepts
/// with a mix of descriptive, method, explanation, comparison and preference
/// questions. Target questions and dev/test questions are written about
/// hidden target passages, so retrieval has a meaningful answer. Dev/test gold
/// passages are disjoint from P_U and join the candidate pool.
corpus::CorpusBundle make_desk_corpus(const DeskCorpusOptions& options = {});

}  // namespace dualtrain::fixture
