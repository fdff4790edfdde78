// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualtrain/models.hpp"

namespace dualtrain::analysis {

struct HistogramBin {
    double low = 0.0;
    double high = 0.0;
    std::size_t count = 0;
};

struct DistributionSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  // population variance
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::vector<HistogramBin> histogram;

    nlohmann::json to_json() const;
};

/// Nearest-rank quantile of sorted data: the value at 1-based rank ceil(p * n).
double nearest_rank(std::span<const double> sorted, double p);

/// Exact mean and population variance, nearest-rank quartiles and an
/// equal-width histogram spanning [min, max]. Throws on empty input.
DistributionSummary summarize_scores(std::span<const double> scores, std::size_t bins = 20);

/// Self-training versus back-training confidence distributions.
struct OrderingReport {
    DistributionSummary self;
    DistributionSummary back;
    bool self_mean_higher = false;
    bool self_variance_lower = false;
    /// Set when either side has fewer than `min_n` scores; both booleans are then false.
    bool insufficient = false;

    nlohmann::json to_json() const;
};

OrderingReport compare_self_vs_back(std::span<const double> self_scores, std::span<const double> back_scores,
                                    std::size_t min_n = 30);

/// Total negative log-likelihood of a generator on question/passage pairs
/// and the number of scored events (tokens plus end-of-sequence).
struct NllTotals {
    double nll = 0.0;
    std::size_t tokens = 0;

    double per_token() const { return tokens == 0 ? 0.0 : nll / static_cast<double>(tokens); }
};

NllTotals corpus_nll(const models::GeneratorModel& generator, std::span<const models::QgPair> pairs,
                     unsigned threads = 0);

struct TrajectoryPoint {
    std::size_t step = 0;
    double train_loss = 0.0;
    std::optional<double> eval_loss;
    std::optional<NllTotals> eval_nll;

    /// exp(eval NLL per token), when NLL totals were logged.
    std::optional<double> perplexity() const;
};

/// Append-only log of training progress. Steps must strictly increase.
class TrajectoryLog {
public:
    void append(TrajectoryPoint point);
    const std::vector<TrajectoryPoint>& points() const noexcept { return points_; }
    /// step,train_loss,eval_loss,ppl
    std::string to_csv() const;

private:
    std::vector<TrajectoryPoint> points_;
};

}  // namespace dualtrain::analysis
