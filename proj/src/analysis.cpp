// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "dualtrain/parallel.hpp"

namespace dualtrain::analysis {

double nearest_rank(std::span<const double> sorted, double p)
{
    if (sorted.empty()) {
        throw std::invalid_argument("nearest_rank: empty input");
    }
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(p * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

DistributionSummary summarize_scores(std::span<const double> scores, std::size_t bins)
{
    if (scores.empty()) {
        throw std::invalid_argument("summarize_scores: empty input");
    }
    if (bins == 0) {
        throw std::invalid_argument("summarize_scores: bins must be >= 1");
    }
    DistributionSummary s;
    s.n = scores.size();
    double sum = 0.0;
    for (const double x : scores) {
        sum += x;
    }
    s.mean = sum / static_cast<double>(s.n);
    double sq = 0.0;
    for (const double x : scores) {
        sq += (x - s.mean) * (x - s.mean);
    }
    s.variance = sq / static_cast<double>(s.n);

    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    s.q1 = nearest_rank(sorted, 0.25);
    s.q2 = nearest_rank(sorted, 0.50);
    s.q3 = nearest_rank(sorted, 0.75);
    s.min = sorted.front();
    s.max = sorted.back();

    const double width = (s.max - s.min) / static_cast<double>(bins);
    s.histogram.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        s.histogram[b].low = s.min + width * static_cast<double>(b);
        s.histogram[b].high = b + 1 == bins ? s.max : s.min + width * static_cast<double>(b + 1);
    }
    for (const double x : sorted) {
        std::size_t b = 0;
        if (width > 0.0) {
            b = std::min(bins - 1, static_cast<std::size_t>((x - s.min) / width));
        }
        ++s.histogram[b].count;
    }
    return s;
}

nlohmann::json DistributionSummary::to_json() const
{
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& bin : histogram) {
        hist.push_back({bin.low, bin.high, bin.count});
    }
    return {{"n", n},   {"mean", mean}, {"variance", variance}, {"q1", q1},         {"q2", q2},
            {"q3", q3}, {"min", min},   {"max", max},           {"histogram", hist}};
}

OrderingReport compare_self_vs_back(std::span<const double> self_scores, std::span<const double> back_scores,
                                    std::size_t min_n)
{
    OrderingReport r;
    r.self = summarize_scores(self_scores);
    r.back = summarize_scores(back_scores);
    r.insufficient = self_scores.size() < min_n || back_scores.size() < min_n;
    if (!r.insufficient) {
        r.self_mean_higher = r.self.mean > r.back.mean;
        r.self_variance_lower = r.self.variance < r.back.variance;
    }
    return r;
}

nlohmann::json OrderingReport::to_json() const
{
    return {{"self", self.to_json()},
            {"back", back.to_json()},
            {"self_mean_higher", self_mean_higher},
            {"self_variance_lower", self_variance_lower},
            {"insufficient", insufficient}};
}

NllTotals corpus_nll(const models::GeneratorModel& generator, std::span<const models::QgPair> pairs, unsigned threads)
{
    const auto per_item = parallel_map(pairs.size(), threads, [&](std::size_t i) {
        return NllTotals{-generator.score(pairs[i].passage, pairs[i].question),
                         generator.scored_length(pairs[i].question)};
    });
    NllTotals total;
    for (const auto& t : per_item) {
        total.nll += t.nll;
        total.tokens += t.tokens;
    }
    return total;
}

std::optional<double> TrajectoryPoint::perplexity() const
{
    if (!eval_nll || eval_nll->tokens == 0) {
        return std::nullopt;
    }
    return std::exp(eval_nll->per_token());
}

void TrajectoryLog::append(TrajectoryPoint point)
{
    if (!points_.empty() && point.step <= points_.back().step) {
        throw std::invalid_argument("trajectory steps must strictly increase");
    }
    points_.push_back(point);
}

std::string TrajectoryLog::to_csv() const
{
    std::string out = "step,train_loss,eval_loss,ppl\n";
    for (const auto& p : points_) {
        const auto ppl = p.perplexity();
        out += fmt::format("{},{:.17g},{},{}\n", p.step, p.train_loss,
                           p.eval_loss ? fmt::format("{:.17g}", *p.eval_loss) : std::string{},
                           ppl ? fmt::format("{:.17g}", *ppl) : std::string{});
    }
    return out;
}

}  // namespace dualtrain::analysis
