// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dualtrain/corpus.hpp"

namespace dualtrain::analysis {

/// Sparse feature vector: (index, value) pairs with unique, ascending indices.
using SparseFeatures = std::vector<std::pair<std::size_t, double>>;

class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual std::string id() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual SparseFeatures extract(std::string_view text) const = 0;
};

/// Token counts hashed (FNV-1a) into `dimension` buckets, L2-normalized.
class HashedBagOfWords final : public FeatureExtractor {
public:
    explicit HashedBagOfWords(std::size_t dimension = std::size_t{1} << 15U);

    std::string id() const override;
    std::size_t dimension() const override { return dimension_; }
    SparseFeatures extract(std::string_view text) const override;

private:
    std::size_t dimension_;
};

enum class DomainLabel { in_domain, ood };

struct LabeledQuestion {
    corpus::Question question;
    DomainLabel label = DomainLabel::in_domain;
};

struct DomainFilterConfig {
    double l2 = 0.1;
    std::size_t iterations = 300;
    double learning_rate = 4.0;
    std::uint64_t seed = 0;
    double alpha = 0.8;  // acceptance threshold on P(in_domain)
};

/// Linear model with a logistic link: P(in_domain | x) = sigmoid(w.x + b).
struct DomainFilterModel {
    std::string feature_id;
    std::vector<double> weights;
    double bias = 0.0;
    double alpha = 0.8;
    std::shared_ptr<const FeatureExtractor> features;

    double probability(std::string_view text) const;
};

/// Minimizes summed logistic loss + (l2 / 2) |w|^2 by full-batch gradient
/// descent; each step moves by learning_rate times the gradient divided by
/// the sample count. The bias is not penalized. Weights start uniform in [-0.01, 0.01] from the
/// seed. Throws std::invalid_argument unless both labels occur.
DomainFilterModel train_domain_filter(std::span<const LabeledQuestion> labeled, const DomainFilterConfig& config,
                                      std::shared_ptr<const FeatureExtractor> features = nullptr);

struct PrPoint {
    double threshold = 0.0;
    double precision = 0.0;  // 1 when nothing is accepted
    double recall = 0.0;     // 0 when there are no in-domain labels
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

struct DomainFilterResult {
    std::vector<corpus::Question> accepted;
    std::vector<corpus::Question> rejected;
    std::vector<PrPoint> pr_curve;  // empty without labels
};

/// Thresholds 0, 0.05, ..., 1.
std::vector<double> default_threshold_grid();

/// Accepts questions with P(in_domain) >= alpha. When `labels` is nonempty
/// (one per question) the result carries a precision/recall curve over `grid`.
DomainFilterResult apply_domain_filter(const DomainFilterModel& model, std::span<const corpus::Question> questions,
                                       double alpha, std::span<const DomainLabel> labels = {},
                                       std::span<const double> grid = {});

/// threshold,precision,recall
std::string pr_curve_csv(std::span<const PrPoint> curve);

}  // namespace dualtrain::analysis
