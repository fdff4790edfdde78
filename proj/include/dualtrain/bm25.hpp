// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "dualtrain/models.hpp"

namespace dualtrain::models {

struct Bm25Config {
    double k1 = 1.2;
    double b = 0.75;

    void validate() const;
    nlohmann::json to_json() const;
    static Bm25Config from_json(const nlohmann::json& j);
};

/// Okapi BM25 over the tokenizer's terms.
///
///   score(q, d) = sum over query tokens t (repeats counted) of
///                 idf(t) * tf(t, d) * (k1 + 1) / (tf(t, d) + k1 * (1 - b + b * |d| / avgdl))
///   idf(t)      = ln(1 + (N - df(t) + 0.5) / (df(t) + 0.5))
///
/// The idf is the non-negative variant used by Lucene, so a term present in
/// every passage never lowers a score. Collection statistics come from the
/// indexed pool; score() evaluates any passage text against them.
class Bm25Retriever final : public RetrieverModel {
public:
    explicit Bm25Retriever(Bm25Config config = {});

    std::string name() const override { return "bm25"; }
    void train(std::span<const RetrievalExample>) override {}
    void fine_tune(std::span<const RetrievalExample>) override {}
    void index(std::span<const corpus::Passage> pool) override;
    bool indexed() const override { return indexed_; }
    std::size_t pool_size() const override { return ids_.size(); }
    std::vector<ScoredPassage> retrieve(std::string_view question, std::size_t k) const override;
    double score(std::string_view question, std::string_view passage) const override;
    bool trainable() const override { return false; }
    std::unique_ptr<RetrieverModel> clone() const override;
    void save(const std::filesystem::path& path) const override;

    double idf(const std::string& term) const;

private:
    using TermCounts = std::unordered_map<std::string, double>;

    double score_tokens(const std::vector<std::string>& query, const TermCounts& tf, double length) const;
    void require_index() const;

    Bm25Config config_;
    bool indexed_ = false;
    std::vector<std::string> ids_;
    std::vector<TermCounts> tf_;
    std::vector<double> lengths_;
    std::unordered_map<std::string, double> df_;
    double avg_length_ = 0.0;
};

/// Top-k_neg BM25 passages for the question, excluding the gold passage.
NegativeSet mine_negatives(const corpus::Question& question, const std::string& gold_passage_id,
                           const Bm25Retriever& pool, std::size_t k_neg = 7);

}  // namespace dualtrain::models
