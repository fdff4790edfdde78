// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/dual_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dualtrain/rng.hpp"

namespace dualtrain::models {

namespace {

double dot(const DualEncoder::Vector& a, const DualEncoder::Vector& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

void axpy(double alpha, const DualEncoder::Vector& x, DualEncoder::Vector& y)
{
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] += alpha * x[i];
    }
}

}  // namespace

void DualEncoderConfig::validate() const
{
    if (dim == 0) {
        throw std::invalid_argument("dual_encoder: dimension must be >= 1");
    }
    if (epochs == 0 || batch == 0) {
        throw std::invalid_argument("dual_encoder: epochs and batch must be >= 1");
    }
    if (!(lr > 0.0) || !(lr_scale > 0.0)) {
        throw std::invalid_argument("dual_encoder: learning rate must be > 0");
    }
}

nlohmann::json DualEncoderConfig::to_json() const
{
    return {{"dim", dim}, {"epochs", epochs}, {"batch", batch}, {"lr", lr}, {"lr_scale", lr_scale}, {"seed", seed}};
}

DualEncoderConfig DualEncoderConfig::from_json(const nlohmann::json& j)
{
    DualEncoderConfig c;
    c.dim = j.value("dim", c.dim);
    c.epochs = j.value("epochs", c.epochs);
    c.batch = j.value("batch", c.batch);
    c.lr = j.value("lr", c.lr);
    c.lr_scale = j.value("lr_scale", c.lr_scale);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

DualEncoder::DualEncoder(DualEncoderConfig config) : config_(config)
{
    config_.validate();
}

DualEncoder::Vector DualEncoder::initial_row(const std::string& token) const
{
    Rng rng(fnv1a(token));
    const double scale = std::sqrt(3.0 / static_cast<double>(config_.dim));
    Vector row(config_.dim);
    for (auto& x : row) {
        x = (2.0 * rng.uniform() - 1.0) * scale;
    }
    return row;
}

const DualEncoder::Vector* DualEncoder::trained_row(const std::string& token) const
{
    auto it = table_.find(token);
    return it == table_.end() ? nullptr : &it->second;
}

DualEncoder::Vector DualEncoder::embedding(const std::string& token) const
{
    if (const auto* row = trained_row(token)) {
        return *row;
    }
    return initial_row(token);
}

void DualEncoder::set_embedding(const std::string& token, Vector value)
{
    if (value.size() != config_.dim) {
        throw std::invalid_argument("dual_encoder: embedding has wrong dimension");
    }
    table_[token] = std::move(value);
}

DualEncoder::Vector DualEncoder::encode(std::string_view text) const
{
    Vector sum(config_.dim, 0.0);
    for (const auto& token : corpus::tokenize(text)) {
        if (const auto* row = trained_row(token)) {
            axpy(1.0, *row, sum);
        } else {
            axpy(1.0, initial_row(token), sum);
        }
    }
    return sum;
}

double DualEncoder::example_loss(const RetrievalExample& ex, Gradient* grad, double weight) const
{
    const Vector q = encode(ex.question);
    std::vector<const std::string*> texts;
    texts.push_back(&ex.positive);
    for (const auto& n : ex.negatives) {
        texts.push_back(&n);
    }
    std::vector<Vector> p;
    std::vector<double> s;
    for (const auto* t : texts) {
        p.push_back(encode(*t));
        s.push_back(dot(q, p.back()));
    }
    const double top = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (const double v : s) {
        z += std::exp(v - top);
    }
    const double lse = top + std::log(z);
    const double loss = lse - s[0];
    if (grad == nullptr) {
        return loss;
    }

    // dL/ds_j = softmax_j - [j == gold]; ds_j/dE(q) = E(p_j); ds_j/dE(p_j) = E(q).
    Vector dq(config_.dim, 0.0);
    for (std::size_t j = 0; j < s.size(); ++j) {
        const double g = (std::exp(s[j] - lse) - (j == 0 ? 1.0 : 0.0)) * weight;
        axpy(g, p[j], dq);
        for (const auto& token : corpus::tokenize(*texts[j])) {
            auto& row = (*grad)[token];
            row.resize(config_.dim, 0.0);
            axpy(g, q, row);
        }
    }
    for (const auto& token : corpus::tokenize(ex.question)) {
        auto& row = (*grad)[token];
        row.resize(config_.dim, 0.0);
        axpy(1.0, dq, row);
    }
    return loss;
}

double DualEncoder::loss(std::span<const RetrievalExample> examples) const
{
    if (examples.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (const auto& ex : examples) {
        total += example_loss(ex, nullptr, 1.0);
    }
    return total / static_cast<double>(examples.size());
}

DualEncoder::Gradient DualEncoder::gradient(std::span<const RetrievalExample> examples) const
{
    Gradient grad;
    const double weight = examples.empty() ? 0.0 : 1.0 / static_cast<double>(examples.size());
    for (const auto& ex : examples) {
        example_loss(ex, &grad, weight);
    }
    return grad;
}

void DualEncoder::run_epochs(std::span<const RetrievalExample> examples)
{
    ++rounds_;
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<RetrievalExample> batch;
    for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
        Rng rng(derive_seed(config_.seed, rounds_ * 100003 + epoch));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.below(i)]);
        }
        for (std::size_t start = 0; start < order.size(); start += config_.batch) {
            const std::size_t end = std::min(order.size(), start + config_.batch);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(examples[order[i]]);
            }
            const Gradient grad = gradient(batch);
            for (const auto& [token, g] : grad) {
                Vector row = embedding(token);
                axpy(-config_.effective_lr(), g, row);
                table_[token] = std::move(row);
            }
            notify(++steps_);
        }
    }
    if (indexed_) {
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            encoded_[i] = encode(pool_texts_[i]);
        }
    }
}

void DualEncoder::train(std::span<const RetrievalExample> examples)
{
    if (examples.empty()) {
        throw ModelError("dual_encoder: empty training set");
    }
    table_.clear();
    rounds_ = 0;
    steps_ = 0;
    run_epochs(examples);
}

void DualEncoder::fine_tune(std::span<const RetrievalExample> examples)
{
    if (examples.empty()) {
        throw ModelError("dual_encoder: empty fine-tuning set");
    }
    run_epochs(examples);
}

void DualEncoder::index(std::span<const corpus::Passage> pool)
{
    ids_.clear();
    encoded_.clear();
    pool_texts_.clear();
    for (const auto& passage : pool) {
        ids_.push_back(passage.id);
        pool_texts_.push_back(passage.text);
        encoded_.push_back(encode(passage.text));
    }
    indexed_ = true;
}

std::vector<ScoredPassage> DualEncoder::retrieve(std::string_view question, std::size_t k) const
{
    if (!indexed_) {
        throw ModelError("dual_encoder: index not built");
    }
    const Vector q = encode(question);
    std::vector<ScoredPassage> scored;
    scored.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        scored.push_back({ids_[i], dot(q, encoded_[i])});
    }
    return rank_top_k(std::move(scored), k);
}

double DualEncoder::score(std::string_view question, std::string_view passage) const
{
    return dot(encode(question), encode(passage));
}

std::unique_ptr<RetrieverModel> DualEncoder::clone() const
{
    return std::make_unique<DualEncoder>(*this);
}

nlohmann::json DualEncoder::to_json() const
{
    std::map<std::string, Vector> sorted(table_.begin(), table_.end());
    nlohmann::json table = nlohmann::json::object();
    for (const auto& [token, row] : sorted) {
        table[token] = row;
    }
    return {{"model", name()}, {"version", 1},     {"config", config_.to_json()},
            {"rounds", rounds_}, {"steps", steps_}, {"table", table}};
}

DualEncoder DualEncoder::from_json(const nlohmann::json& j)
{
    DualEncoder enc(DualEncoderConfig::from_json(j.at("config")));
    enc.rounds_ = j.value("rounds", std::size_t{0});
    enc.steps_ = j.value("steps", std::size_t{0});
    for (const auto& [token, row] : j.at("table").items()) {
        enc.set_embedding(token, row.get<Vector>());
    }
    return enc;
}

void DualEncoder::save(const std::filesystem::path& path) const
{
    write_checkpoint(path, to_json());
}

}  // namespace dualtrain::models
