// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualtrain/corpus.hpp"
#include "dualtrain/models.hpp"

namespace dualtrain::eval {

using Tokens = std::vector<std::string>;

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested evaluation split has no pairs.
class EmptySplitError : public EvalError {
public:
    using EvalError::EvalError;
};

enum class BleuSmoothing {
    none,
    /// (matches + 1) / (total + 1) for orders n >= 2.
    add_one,
};

/// Corpus-level BLEU-max_n with uniform weights: clipped n-gram precisions
/// summed over the corpus, geometric mean, and brevity penalty
/// exp(1 - r / c) when the total hypothesis length c does not exceed the
/// total reference length r. Unsmoothed BLEU is 0 as soon as one precision is.
double bleu(std::span<const Tokens> hypotheses, std::span<const Tokens> references, int max_n,
            BleuSmoothing smoothing = BleuSmoothing::none);

/// LCS-based F1 for one pair.
double rouge_l(const Tokens& hypothesis, const Tokens& reference);
/// Mean of rouge_l over the pairs.
double rouge_l(std::span<const Tokens> hypotheses, std::span<const Tokens> references);

struct MeteorParams {
    double alpha = 0.9;
    double beta = 3.0;
    double gamma = 0.5;
};

struct MeteorAlignment {
    std::size_t matches = 0;
    std::size_t chunks = 0;
};

/// Exact-match unigram alignment with the most matches and, among those,
/// the fewest chunks. The search is exhaustive up to a node budget that
/// ordinary sentences never reach; past it the best alignment found so far
/// is returned.
MeteorAlignment meteor_align(const Tokens& hypothesis, const Tokens& reference);

/// METEOR restricted to exact surface matches (no stemming or synonyms).
double meteor_lite(const Tokens& hypothesis, const Tokens& reference, const MeteorParams& params = {});
double meteor_lite(std::span<const Tokens> hypotheses, std::span<const Tokens> references,
                   const MeteorParams& params = {});

inline const std::vector<std::size_t> default_ks = {1, 10, 20, 40, 100};

/// Indexes `retriever` over `pool`, retrieves max(ks) passages per question
/// and returns k -> fraction of pairs whose gold passage ranks within k.
std::map<std::size_t, double> topk_accuracy(models::RetrieverModel& retriever,
                                            std::span<const corpus::AlignedPair> pairs,
                                            std::span<const corpus::Passage> pool,
                                            std::span<const std::size_t> ks = default_ks, unsigned threads = 0);

struct QgScores {
    double b1 = 0.0;
    double b2 = 0.0;
    double b3 = 0.0;
    double b4 = 0.0;
    double meteor = 0.0;
    double rouge_l = 0.0;

    friend bool operator==(const QgScores&, const QgScores&) = default;
};

QgScores score_generations(std::span<const Tokens> hypotheses, std::span<const Tokens> references,
                           BleuSmoothing smoothing = BleuSmoothing::none);

struct EvalReport {
    std::optional<QgScores> qg;
    std::map<std::size_t, double> r_at;
    std::size_t n_eval = 0;
    std::size_t candidate_pool_size = 0;

    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
    /// Header plus one row, metrics scaled by 100.
    std::string to_csv() const;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct EvalOptions {
    models::DecodeConfig decode;
    std::vector<std::size_t> ks = default_ks;
    BleuSmoothing smoothing = BleuSmoothing::none;
    bool qg = true;
    bool ir = true;
    unsigned threads = 0;
};

/// One generated question per passage; item i decodes with
/// derive_seed(decode.seed, i). Failed items yield empty questions.
std::vector<std::string> generate_questions(const models::GeneratorModel& generator,
                                            const std::vector<std::string>& passages,
                                            const models::DecodeConfig& decode, unsigned threads = 0);

/// QG metrics against the gold questions of the split and top-k accuracy
/// over the bundle's candidate pool. The retriever is re-indexed.
EvalReport evaluate(const models::GeneratorModel& generator, models::RetrieverModel& retriever,
                    const corpus::CorpusBundle& bundle, corpus::Split split, const EvalOptions& options = {});

}  // namespace dualtrain::eval
