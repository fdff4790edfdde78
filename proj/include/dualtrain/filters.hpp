// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dualtrain/models.hpp"
#include "dualtrain/synthetic.hpp"

namespace dualtrain::filters {

enum class FilterKind { none, self_consistency, cross_consistency };
enum class Critic { generator, retriever };

std::string_view to_string(FilterKind kind);
std::string_view to_string(Critic critic);
/// Accepts "none", "self", "cross" and the long forms "self_consistency", "cross_consistency".
FilterKind parse_filter_kind(std::string_view text);

/// Absolute score cut-offs, one per critic. A set threshold replaces
/// accept_fraction for every set handed to that critic.
struct AbsoluteThresholds {
    std::optional<double> generator;
    std::optional<double> retriever;

    friend bool operator==(const AbsoluteThresholds&, const AbsoluteThresholds&) = default;
};

struct FilterPolicy {
    FilterKind kind = FilterKind::none;
    double accept_fraction = 0.75;  // in (0, 1]
    AbsoluteThresholds absolute;

    void validate() const;
    nlohmann::json to_json() const;
    static FilterPolicy from_json(const nlohmann::json& j);

    friend bool operator==(const FilterPolicy&, const FilterPolicy&) = default;
};

/// Operating points of the consistency filters for large neural models.
/// They are on those models' score scales and do not transfer to the
/// reference models here.
inline constexpr AbsoluteThresholds neural_self_consistency{-1.19, 78.24};
inline constexpr AbsoluteThresholds neural_cross_consistency{-5.95, 71.65};

struct FilterReport {
    Critic critic = Critic::generator;
    /// Score of the last kept item, or -infinity when nothing was filtered
    /// (serialized as null).
    double threshold = 0.0;
    std::size_t n_in = 0;
    std::size_t n_kept = 0;
    double mean = 0.0;
    double variance = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;

    nlohmann::json to_json() const;
};

struct Selection {
    std::vector<bool> kept;
    double threshold = 0.0;
};

/// Ranks by score descending, ties by ascending index, and keeps the first
/// ceil(fraction * n). The threshold is the score of the last kept item.
Selection select_by_fraction(std::span<const double> scores, double accept_fraction);

/// Keeps every score >= threshold.
Selection select_by_threshold(std::span<const double> scores, double threshold);

/// Scores every example with the critic and stores the result in
/// gen_loglik (generator) or ret_sim (retriever). Throws ModelError when the
/// critic cannot score.
void score_with_critic(const models::GeneratorModel& critic, std::span<augment::SyntheticExample> examples,
                       unsigned threads = 0);
void score_with_critic(const models::RetrieverModel& critic, std::span<augment::SyntheticExample> examples,
                       unsigned threads = 0);

/// The score field `critic` governs.
std::vector<double> critic_scores(std::span<const augment::SyntheticExample> examples, Critic critic);

/// The critic judging a synthetic set of `task` under `kind`: the task's own
/// model for self consistency, the dual model for cross consistency.
Critic critic_for(FilterKind kind, augment::Task task);

struct FilterResult {
    std::optional<FilterReport> generator_set;  // absent when S_G is empty
    std::optional<FilterReport> retriever_set;  // absent when S_R is empty
};

/// Sets the kept flags of both synthetic sets. Scores already present in the
/// governing field are used as they are; missing ones are computed by the
/// critic. With kind none every example is kept and the threshold is -inf.
FilterResult apply_filter(const FilterPolicy& policy, std::span<augment::SyntheticExample> s_g,
                          std::span<augment::SyntheticExample> s_r, const models::GeneratorModel& generator,
                          const models::RetrieverModel& retriever, unsigned threads = 0);

}  // namespace dualtrain::filters
