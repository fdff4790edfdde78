// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dualtrain/analysis.hpp"
#include "dualtrain/corpus.hpp"
#include "dualtrain/filters.hpp"
#include "dualtrain/models.hpp"
#include "dualtrain/synthetic.hpp"

namespace dualtrain::augment {

enum class AdaptTask { qg, ir, both };

std::string_view to_string(AdaptTask task);
AdaptTask parse_adapt_task(std::string_view text);

struct AdaptConfig {
    Direction mode = Direction::back;
    /// Task whose dev metric drives early stopping.
    AdaptTask task = AdaptTask::both;
    /// Build and fine-tune on both synthetic sets even when only one task is tracked.
    bool adapt_both = true;
    filters::FilterPolicy filter;
    std::size_t max_iters = 2;
    /// Iteration t decodes with derive_seed(decode.seed, t).
    models::DecodeConfig decode;
    std::size_t negatives_k = 7;
    std::size_t dev_k = 40;
    unsigned threads = 0;
};

/// Dev scores after one iteration. A tracked task must have its value set.
struct DevScores {
    std::optional<double> qg;  // BLEU-4 by default
    std::optional<double> ir;  // R@dev_k by default
};

/// Replaces the dev evaluation; called with the models after iteration t.
using DevMetricFn =
    std::function<DevScores(const models::GeneratorModel&, models::RetrieverModel&, std::size_t t)>;

struct IterationRecord {
    std::size_t t = 0;
    /// The tracked metric; the mean of both for AdaptTask::both.
    double dev_metric = 0.0;
    std::optional<double> dev_qg;
    std::optional<double> dev_ir;
    std::size_t sg_size = 0;
    std::size_t sr_size = 0;
    double kept_frac_g = 0.0;  // 0 for an empty set
    double kept_frac_r = 0.0;
    bool best = false;
    double wall_seconds = 0.0;
    std::optional<filters::FilterReport> filter_g;
    std::optional<filters::FilterReport> filter_r;
};

struct AdaptationHistory {
    std::vector<IterationRecord> iterations;
    std::size_t best_t = 0;
    /// Best dev metric minus the T=1 dev metric.
    double net_gain = 0.0;

    /// Wall time is excluded so identical runs serialize identically.
    nlohmann::json to_json() const;
};

struct AdaptResult {
    std::unique_ptr<models::GeneratorModel> generator;
    std::unique_ptr<models::RetrieverModel> retriever;
    AdaptationHistory history;
    /// S_G followed by S_R of the best iteration, with their kept flags.
    std::vector<SyntheticExample> synthetic;
    /// Step 0 is the starting model; step t follows iteration t.
    analysis::TrajectoryLog qg_trajectory;
    analysis::TrajectoryLog ir_trajectory;
};

/// Iterative refinement. Each iteration indexes the retriever over P_U,
/// builds S_G and S_R with the current models, filters them, fine-tunes the
/// generator on kept S_G and the retriever on kept S_R (from the current
/// weights) and scores the dev split. The loop ends at max_iters or after the
/// first iteration whose tracked dev metric is below the previous one (for
/// AdaptTask::both, when either task drops). The returned models are copies
/// of the best iteration's models; the inputs are not modified.
///
/// Retriever negatives are mined by BM25 over P_U the first time an item is
/// seen and reused afterwards, keyed by the natural-side provenance id.
AdaptResult adapt(const AdaptConfig& config, const corpus::CorpusBundle& bundle,
                  const models::GeneratorModel& generator, const models::RetrieverModel& retriever,
                  const DevMetricFn& dev_metric = {});

/// Default dev scores: corpus BLEU-4 of generated dev questions and R@k over
/// the candidate pool. Re-indexes the retriever.
DevScores default_dev_scores(const models::GeneratorModel& generator, models::RetrieverModel& retriever,
                             const corpus::CorpusBundle& bundle, AdaptTask task, const models::DecodeConfig& decode,
                             std::size_t k, unsigned threads);

/// Aligned pairs as retriever training examples with up to `k_neg` BM25
/// negatives mined from `pool`.
std::vector<models::RetrievalExample> mined_retrieval_examples(std::span<const corpus::AlignedPair> pairs,
                                                               std::span<const corpus::Passage> pool,
                                                               std::size_t k_neg);

/// Passages of `pairs`, first occurrence of each id.
std::vector<corpus::Passage> unique_passages(std::span<const corpus::AlignedPair> pairs);

/// Mean over examples of lse(s_pos, s_neg...) - s_pos using retriever.score.
double contrastive_loss(const models::RetrieverModel& retriever, std::span<const models::RetrievalExample> examples,
                        unsigned threads = 0);

}  // namespace dualtrain::augment
