// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dualtrain/corpus.hpp"

namespace dualtrain::models {

/// Top-k sampling settings for question generation.
struct DecodeConfig {
    int top_k = 50;
    int max_length = 30;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Generation {
    std::string question;
    double loglik = 0.0;
};

/// One generator training record: the conditioning passage and the target question.
struct QgPair {
    std::string passage;
    std::string question;
};

/// One retriever training record: question, gold passage and mined negatives.
struct RetrievalExample {
    std::string question;
    std::string positive;
    std::vector<std::string> negatives;
};

struct ScoredPassage {
    std::string id;
    double score = 0.0;

    friend bool operator==(const ScoredPassage&, const ScoredPassage&) = default;
};

/// BM25-mined hard negatives for one question. Never contains the gold id.
struct NegativeSet {
    std::string question_id;
    std::vector<std::string> negative_passage_ids;
};

/// Called after every mini-batch update with the 1-based global step.
using TrainObserver = std::function<void(std::size_t step)>;

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Question generator: a conditional model of questions given a passage.
///
/// Implementations must keep generate() deterministic for a fixed model state
/// and decode seed, return log-likelihoods <= 0 from score(), and make
/// fine_tune() continue from the current parameters.
class GeneratorModel {
public:
    virtual ~GeneratorModel() = default;

    virtual std::string name() const = 0;
    virtual void train(std::span<const QgPair> pairs) = 0;
    virtual void fine_tune(std::span<const QgPair> pairs) = 0;
    virtual Generation generate(std::string_view passage, const DecodeConfig& decode) const = 0;
    /// log P(question | passage).
    virtual double score(std::string_view passage, std::string_view question) const = 0;
    /// Number of scored events for `question` (tokens plus end-of-sequence).
    virtual std::size_t scored_length(std::string_view question) const;
    virtual bool can_score() const { return true; }
    virtual std::unique_ptr<GeneratorModel> clone() const = 0;
    virtual void save(const std::filesystem::path& path) const = 0;

    void set_observer(TrainObserver observer) { observer_ = std::move(observer); }

protected:
    GeneratorModel() = default;
    GeneratorModel(const GeneratorModel&) = default;
    GeneratorModel& operator=(const GeneratorModel&) = default;

    void notify(std::size_t step) const
    {
        if (observer_) {
            observer_(step);
        }
    }

private:
    TrainObserver observer_;
};

/// Passage retriever ranking an indexed pool by similarity to a question.
///
/// retrieve() returns min(k, pool) entries sorted by similarity descending
/// with ties broken by ascending passage id, and score(q, p) reproduces the
/// similarity retrieve() reports for the same pair.
class RetrieverModel {
public:
    virtual ~RetrieverModel() = default;

    virtual std::string name() const = 0;
    virtual void train(std::span<const RetrievalExample> examples) = 0;
    virtual void fine_tune(std::span<const RetrievalExample> examples) = 0;
    virtual void index(std::span<const corpus::Passage> pool) = 0;
    virtual bool indexed() const = 0;
    virtual std::size_t pool_size() const = 0;
    virtual std::vector<ScoredPassage> retrieve(std::string_view question, std::size_t k) const = 0;
    virtual double score(std::string_view question, std::string_view passage) const = 0;
    /// False for models with no trainable parameters (BM25).
    virtual bool trainable() const { return true; }
    virtual bool can_score() const { return true; }
    virtual std::unique_ptr<RetrieverModel> clone() const = 0;
    virtual void save(const std::filesystem::path& path) const = 0;

    void set_observer(TrainObserver observer) { observer_ = std::move(observer); }

protected:
    RetrieverModel() = default;
    RetrieverModel(const RetrieverModel&) = default;
    RetrieverModel& operator=(const RetrieverModel&) = default;

    void notify(std::size_t step) const
    {
        if (observer_) {
            observer_(step);
        }
    }

private:
    TrainObserver observer_;
};

/// Sorts (id, score) candidates by score descending then id ascending and
/// keeps the first k.
std::vector<ScoredPassage> rank_top_k(std::vector<ScoredPassage> candidates, std::size_t k);

// Checkpoints are a text file: the magic line "DUALTRAIN1" followed by one
// JSON document whose "model" field selects the implementation.
inline constexpr std::string_view checkpoint_magic = "DUALTRAIN1";

void write_checkpoint(const std::filesystem::path& path, const nlohmann::json& body);
nlohmann::json read_checkpoint(const std::filesystem::path& path);

std::unique_ptr<GeneratorModel> load_generator(const std::filesystem::path& path);
std::unique_ptr<RetrieverModel> load_retriever(const std::filesystem::path& path);

}  // namespace dualtrain::models
