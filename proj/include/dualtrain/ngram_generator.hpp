// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "dualtrain/models.hpp"

namespace dualtrain::models {

struct NgramCopyConfig {
    double copy_weight = 0.5;  // lambda
    double smoothing = 0.1;    // add-k constant of the bigram model
    std::size_t batch = 32;    // observer granularity while counting

    void validate() const;
    nlohmann::json to_json() const;
    static NgramCopyConfig from_json(const nlohmann::json& j);
};

/// Reference question generator: an add-k smoothed bigram language model over
/// question tokens mixed with a copy distribution over the passage.
///
///   P(w | prev, p) = lambda * copy(w | p) + (1 - lambda) * bigram(w | prev)
///
/// copy(w | p) is the normalised frequency of w in the passage, restricted to
/// the question vocabulary. When no passage token is in the vocabulary the
/// bigram term alone is used. Out-of-vocabulary question tokens map to a
/// single <unk> outcome that only ever receives smoothing mass and is never
/// sampled. Parameters are counts, so fine-tuning adds counts to the current
/// state.
class NgramCopyGenerator final : public GeneratorModel {
public:
    explicit NgramCopyGenerator(NgramCopyConfig config = {});

    std::string name() const override { return "ngram_copy"; }
    void train(std::span<const QgPair> pairs) override;
    void fine_tune(std::span<const QgPair> pairs) override;
    Generation generate(std::string_view passage, const DecodeConfig& decode) const override;
    double score(std::string_view passage, std::string_view question) const override;
    std::unique_ptr<GeneratorModel> clone() const override;
    void save(const std::filesystem::path& path) const override;

    nlohmann::json to_json() const;
    static NgramCopyGenerator from_json(const nlohmann::json& j);

    const NgramCopyConfig& config() const noexcept { return config_; }
    std::size_t vocabulary_size() const noexcept { return vocab_.size(); }

private:
    static constexpr int bos_id = 0;
    static constexpr int eos_id = 1;
    static constexpr int unk_id = 2;

    void reset();
    int intern(const std::string& token);
    int lookup(const std::string& token) const;
    void count(std::span<const QgPair> pairs);
    /// Copy distribution over token ids; empty when the passage has no vocabulary token.
    std::unordered_map<int, double> copy_distribution(std::string_view passage) const;
    double probability(int prev, int next, const std::unordered_map<int, double>& copy) const;

    NgramCopyConfig config_;
    std::vector<std::string> vocab_;
    std::unordered_map<std::string, int> ids_;
    std::vector<std::unordered_map<int, double>> bigrams_;
    std::vector<double> row_totals_;
    std::size_t steps_ = 0;
};

}  // namespace dualtrain::models
