// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/bm25.hpp"

#include <cmath>

namespace dualtrain::models {

void Bm25Config::validate() const
{
    if (!(k1 >= 0.0)) {
        throw std::invalid_argument("bm25: k1 must be >= 0");
    }
    if (!(b >= 0.0 && b <= 1.0)) {
        throw std::invalid_argument("bm25: b must be in [0, 1]");
    }
}

nlohmann::json Bm25Config::to_json() const
{
    return {{"k1", k1}, {"b", b}};
}

Bm25Config Bm25Config::from_json(const nlohmann::json& j)
{
    Bm25Config c;
    c.k1 = j.value("k1", c.k1);
    c.b = j.value("b", c.b);
    c.validate();
    return c;
}

Bm25Retriever::Bm25Retriever(Bm25Config config) : config_(config)
{
    config_.validate();
}

void Bm25Retriever::index(std::span<const corpus::Passage> pool)
{
    ids_.clear();
    tf_.clear();
    lengths_.clear();
    df_.clear();
    double total = 0.0;
    for (const auto& passage : pool) {
        TermCounts counts;
        const auto tokens = corpus::tokenize(passage.text);
        for (const auto& t : tokens) {
            counts[t] += 1.0;
        }
        for (const auto& [term, c] : counts) {
            df_[term] += 1.0;
        }
        ids_.push_back(passage.id);
        tf_.push_back(std::move(counts));
        lengths_.push_back(static_cast<double>(tokens.size()));
        total += static_cast<double>(tokens.size());
    }
    avg_length_ = ids_.empty() ? 0.0 : total / static_cast<double>(ids_.size());
    indexed_ = true;
}

double Bm25Retriever::idf(const std::string& term) const
{
    const double n = static_cast<double>(ids_.size());
    auto it = df_.find(term);
    const double df = it == df_.end() ? 0.0 : it->second;
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Retriever::score_tokens(const std::vector<std::string>& query, const TermCounts& tf, double length) const
{
    const double norm = avg_length_ > 0.0 ? length / avg_length_ : 0.0;
    double s = 0.0;
    for (const auto& term : query) {
        auto it = tf.find(term);
        if (it == tf.end()) {
            continue;
        }
        const double f = it->second;
        s += idf(term) * f * (config_.k1 + 1.0) / (f + config_.k1 * (1.0 - config_.b + config_.b * norm));
    }
    return s;
}

void Bm25Retriever::require_index() const
{
    if (!indexed_) {
        throw ModelError("bm25: index not built");
    }
}

std::vector<ScoredPassage> Bm25Retriever::retrieve(std::string_view question, std::size_t k) const
{
    require_index();
    const auto query = corpus::tokenize(question);
    std::vector<ScoredPassage> scored;
    scored.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        scored.push_back({ids_[i], score_tokens(query, tf_[i], lengths_[i])});
    }
    return rank_top_k(std::move(scored), k);
}

double Bm25Retriever::score(std::string_view question, std::string_view passage) const
{
    require_index();
    TermCounts counts;
    const auto tokens = corpus::tokenize(passage);
    for (const auto& t : tokens) {
        counts[t] += 1.0;
    }
    return score_tokens(corpus::tokenize(question), counts, static_cast<double>(tokens.size()));
}

std::unique_ptr<RetrieverModel> Bm25Retriever::clone() const
{
    return std::make_unique<Bm25Retriever>(*this);
}

void Bm25Retriever::save(const std::filesystem::path& path) const
{
    write_checkpoint(path, {{"model", name()}, {"version", 1}, {"config", config_.to_json()}});
}

NegativeSet mine_negatives(const corpus::Question& question, const std::string& gold_passage_id,
                           const Bm25Retriever& pool, std::size_t k_neg)
{
    NegativeSet set{question.id, {}};
    if (!pool.indexed() || pool.pool_size() == 0 || k_neg == 0) {
        return set;
    }
    for (auto& hit : pool.retrieve(question.text, k_neg + 1)) {
        if (hit.id == gold_passage_id) {
            continue;
        }
        if (set.negative_passage_ids.size() == k_neg) {
            break;
        }
        set.negative_passage_ids.push_back(std::move(hit.id));
    }
    return set;
}

}  // namespace dualtrain::models
