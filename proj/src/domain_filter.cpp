// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/domain_filter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

#include "dualtrain/rng.hpp"

namespace dualtrain::analysis {

HashedBagOfWords::HashedBagOfWords(std::size_t dimension) : dimension_(dimension)
{
    if (dimension == 0) {
        throw std::invalid_argument("feature dimension must be >= 1");
    }
}

std::string HashedBagOfWords::id() const
{
    return fmt::format("hashed-bow-{}", dimension_);
}

SparseFeatures HashedBagOfWords::extract(std::string_view text) const
{
    std::map<std::size_t, double> counts;
    for (const auto& token : corpus::tokenize(text)) {
        counts[fnv1a(token) % dimension_] += 1.0;
    }
    double norm = 0.0;
    for (const auto& [index, value] : counts) {
        norm += value * value;
    }
    norm = std::sqrt(norm);
    SparseFeatures out(counts.begin(), counts.end());
    for (auto& [index, value] : out) {
        value /= norm;
    }
    return out;
}

namespace {

double sigmoid(double z)
{
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double linear(const std::vector<double>& w, double b, const SparseFeatures& x)
{
    double z = b;
    for (const auto& [index, value] : x) {
        z += w[index] * value;
    }
    return z;
}

}  // namespace

double DomainFilterModel::probability(std::string_view text) const
{
    if (!features) {
        throw std::logic_error("domain filter has no feature extractor");
    }
    return sigmoid(linear(weights, bias, features->extract(text)));
}

DomainFilterModel train_domain_filter(std::span<const LabeledQuestion> labeled, const DomainFilterConfig& config,
                                      std::shared_ptr<const FeatureExtractor> features)
{
    if (!features) {
        features = std::make_shared<HashedBagOfWords>();
    }
    const auto in_domain = static_cast<std::size_t>(std::count_if(
        labeled.begin(), labeled.end(), [](const auto& l) { return l.label == DomainLabel::in_domain; }));
    if (in_domain == 0 || in_domain == labeled.size()) {
        throw std::invalid_argument("domain filter training needs both in-domain and out-of-domain examples");
    }

    std::vector<SparseFeatures> xs;
    std::vector<double> ys;
    xs.reserve(labeled.size());
    for (const auto& l : labeled) {
        xs.push_back(features->extract(l.question.text));
        ys.push_back(l.label == DomainLabel::in_domain ? 1.0 : 0.0);
    }

    const std::size_t dim = features->dimension();
    DomainFilterModel model;
    model.feature_id = features->id();
    model.alpha = config.alpha;
    model.features = features;
    model.weights.resize(dim);
    Rng rng(config.seed);
    for (auto& w : model.weights) {
        w = (rng.uniform() * 2.0 - 1.0) * 0.01;
    }

    const double n = static_cast<double>(xs.size());
    std::vector<double> grad(dim);
    for (std::size_t it = 0; it < config.iterations; ++it) {
        for (std::size_t d = 0; d < dim; ++d) {
            grad[d] = config.l2 * model.weights[d] / n;
        }
        double grad_b = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double residual = (sigmoid(linear(model.weights, model.bias, xs[i])) - ys[i]) / n;
            grad_b += residual;
            for (const auto& [index, value] : xs[i]) {
                grad[index] += residual * value;
            }
        }
        for (std::size_t d = 0; d < dim; ++d) {
            model.weights[d] -= config.learning_rate * grad[d];
        }
        model.bias -= config.learning_rate * grad_b;
    }
    return model;
}

std::vector<double> default_threshold_grid()
{
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) {
        grid.push_back(static_cast<double>(i) / 20.0);
    }
    return grid;
}

DomainFilterResult apply_domain_filter(const DomainFilterModel& model, std::span<const corpus::Question> questions,
                                       double alpha, std::span<const DomainLabel> labels, std::span<const double> grid)
{
    if (!labels.empty() && labels.size() != questions.size()) {
        throw std::invalid_argument("apply_domain_filter: one label per question required");
    }
    std::vector<double> probs;
    probs.reserve(questions.size());
    DomainFilterResult result;
    for (const auto& q : questions) {
        probs.push_back(model.probability(q.text));
        (probs.back() >= alpha ? result.accepted : result.rejected).push_back(q);
    }
    if (labels.empty()) {
        return result;
    }
    const auto default_grid = default_threshold_grid();
    if (grid.empty()) {
        grid = default_grid;
    }
    for (const double t : grid) {
        PrPoint p;
        p.threshold = t;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const bool accepted = probs[i] >= t;
            const bool positive = labels[i] == DomainLabel::in_domain;
            p.tp += accepted && positive ? 1 : 0;
            p.fp += accepted && !positive ? 1 : 0;
            p.fn += !accepted && positive ? 1 : 0;
        }
        p.precision = p.tp + p.fp == 0 ? 1.0 : static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp);
        p.recall = p.tp + p.fn == 0 ? 0.0 : static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fn);
        result.pr_curve.push_back(p);
    }
    return result;
}

std::string pr_curve_csv(std::span<const PrPoint> curve)
{
    std::string out = "threshold,precision,recall\n";
    for (const auto& p : curve) {
        out += fmt::format("{:.2f},{:.6f},{:.6f}\n", p.threshold, p.precision, p.recall);
    }
    return out;
}

}  // namespace dualtrain::analysis
