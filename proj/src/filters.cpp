// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dualtrain/analysis.hpp"
#include "dualtrain/parallel.hpp"

namespace dualtrain::filters {

using augment::SyntheticExample;
using augment::Task;

std::string_view to_string(FilterKind kind)
{
    switch (kind) {
    case FilterKind::none: return "none";
    case FilterKind::self_consistency: return "self";
    case FilterKind::cross_consistency: return "cross";
    }
    return "none";
}

std::string_view to_string(Critic critic)
{
    return critic == Critic::generator ? "generator" : "retriever";
}

FilterKind parse_filter_kind(std::string_view text)
{
    if (text == "none") {
        return FilterKind::none;
    }
    if (text == "self" || text == "self_consistency") {
        return FilterKind::self_consistency;
    }
    if (text == "cross" || text == "cross_consistency") {
        return FilterKind::cross_consistency;
    }
    throw std::invalid_argument(fmt::format("unknown filter \"{}\" (expected none, self or cross)", text));
}

void FilterPolicy::validate() const
{
    if (!(accept_fraction > 0.0 && accept_fraction <= 1.0)) {
        throw std::invalid_argument(fmt::format("accept_fraction must be in (0, 1], got {}", accept_fraction));
    }
    for (const auto& t : {absolute.generator, absolute.retriever}) {
        if (t && !std::isfinite(*t)) {
            throw std::invalid_argument("absolute thresholds must be finite");
        }
    }
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional_number(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return j.at(key).get<double>();
}

}  // namespace

nlohmann::json FilterPolicy::to_json() const
{
    return {{"kind", to_string(kind)},
            {"accept_fraction", accept_fraction},
            {"absolute_threshold",
             {{"generator", optional_number(absolute.generator)}, {"retriever", optional_number(absolute.retriever)}}}};
}

FilterPolicy FilterPolicy::from_json(const nlohmann::json& j)
{
    FilterPolicy p;
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") {
            p.kind = parse_filter_kind(value.get<std::string>());
        } else if (key == "accept_fraction") {
            p.accept_fraction = value.get<double>();
        } else if (key == "absolute_threshold") {
            for (const auto& [critic, v] : value.items()) {
                if (critic != "generator" && critic != "retriever") {
                    throw std::invalid_argument(fmt::format("unknown key \"absolute_threshold.{}\"", critic));
                }
            }
            p.absolute.generator = read_optional_number(value, "generator");
            p.absolute.retriever = read_optional_number(value, "retriever");
        } else {
            throw std::invalid_argument(fmt::format("unknown key \"{}\"", key));
        }
    }
    p.validate();
    return p;
}

nlohmann::json FilterReport::to_json() const
{
    return {{"critic", to_string(critic)},
            {"threshold", std::isfinite(threshold) ? nlohmann::json(threshold) : nlohmann::json(nullptr)},
            {"n_in", n_in},
            {"n_kept", n_kept},
            {"mean", mean},
            {"variance", variance},
            {"q1", q1},
            {"q2", q2},
            {"q3", q3}};
}

Selection select_by_fraction(std::span<const double> scores, double accept_fraction)
{
    if (scores.empty()) {
        throw std::invalid_argument("select_by_fraction: empty input");
    }
    if (!(accept_fraction > 0.0 && accept_fraction <= 1.0)) {
        throw std::invalid_argument("select_by_fraction: fraction must be in (0, 1]");
    }
    const std::size_t n = scores.size();
    const auto keep = std::min(n, static_cast<std::size_t>(std::ceil(accept_fraction * static_cast<double>(n))));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    Selection s;
    s.kept.assign(n, false);
    for (std::size_t r = 0; r < keep; ++r) {
        s.kept[order[r]] = true;
    }
    s.threshold = scores[order[keep - 1]];
    return s;
}

Selection select_by_threshold(std::span<const double> scores, double threshold)
{
    Selection s;
    s.threshold = threshold;
    s.kept.reserve(scores.size());
    for (const double x : scores) {
        s.kept.push_back(x >= threshold);
    }
    return s;
}

void score_with_critic(const models::GeneratorModel& critic, std::span<SyntheticExample> examples, unsigned threads)
{
    if (!critic.can_score()) {
        throw models::ModelError(fmt::format("generator \"{}\" cannot act as a critic: no score capability",
                                             critic.name()));
    }
    const auto scores = parallel_map(examples.size(), threads, [&](std::size_t i) {
        return critic.score(examples[i].passage(), examples[i].question());
    });
    for (std::size_t i = 0; i < examples.size(); ++i) {
        examples[i].gen_loglik = scores[i];
    }
}

void score_with_critic(const models::RetrieverModel& critic, std::span<SyntheticExample> examples, unsigned threads)
{
    if (!critic.can_score()) {
        throw models::ModelError(fmt::format("retriever \"{}\" cannot act as a critic: no score capability",
                                             critic.name()));
    }
    const auto scores = parallel_map(examples.size(), threads, [&](std::size_t i) {
        return critic.score(examples[i].question(), examples[i].passage());
    });
    for (std::size_t i = 0; i < examples.size(); ++i) {
        examples[i].ret_sim = scores[i];
    }
}

std::vector<double> critic_scores(std::span<const SyntheticExample> examples, Critic critic)
{
    std::vector<double> out;
    out.reserve(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& field = critic == Critic::generator ? examples[i].gen_loglik : examples[i].ret_sim;
        if (!field) {
            throw std::invalid_argument(fmt::format("example {} has no {} score", i, to_string(critic)));
        }
        out.push_back(*field);
    }
    return out;
}

Critic critic_for(FilterKind kind, Task task)
{
    const Critic own = task == Task::qg ? Critic::generator : Critic::retriever;
    const Critic dual = task == Task::qg ? Critic::retriever : Critic::generator;
    return kind == FilterKind::cross_consistency ? dual : own;
}

namespace {

bool has_score(const SyntheticExample& e, Critic critic)
{
    return (critic == Critic::generator ? e.gen_loglik : e.ret_sim).has_value();
}

FilterReport filter_set(const FilterPolicy& policy, Task task, std::span<SyntheticExample> set,
                        const models::GeneratorModel& generator, const models::RetrieverModel& retriever,
                        unsigned threads)
{
    const Critic critic = critic_for(policy.kind, task);
    FilterReport report;
    report.critic = critic;
    report.n_in = set.size();

    const bool complete = std::all_of(set.begin(), set.end(), [&](const auto& e) { return has_score(e, critic); });
    if (!complete && policy.kind != FilterKind::none) {
        if (critic == Critic::generator) {
            score_with_critic(generator, set, threads);
        } else {
            score_with_critic(retriever, set, threads);
        }
    }

    std::vector<double> scores;
    if (complete || policy.kind != FilterKind::none) {
        scores = critic_scores(set, critic);
        const auto summary = analysis::summarize_scores(scores);
        report.mean = summary.mean;
        report.variance = summary.variance;
        report.q1 = summary.q1;
        report.q2 = summary.q2;
        report.q3 = summary.q3;
    }

    Selection selection;
    if (policy.kind == FilterKind::none) {
        selection.kept.assign(set.size(), true);
        selection.threshold = -std::numeric_limits<double>::infinity();
    } else {
        const auto& absolute = critic == Critic::generator ? policy.absolute.generator : policy.absolute.retriever;
        selection = absolute ? select_by_threshold(scores, *absolute) : select_by_fraction(scores, policy.accept_fraction);
    }
    for (std::size_t i = 0; i < set.size(); ++i) {
        set[i].kept = selection.kept[i];
        report.n_kept += selection.kept[i] ? 1 : 0;
    }
    report.threshold = selection.threshold;
    spdlog::debug("filter {} on {} set: critic {}, kept {}/{}", to_string(policy.kind), augment::to_string(task),
                  to_string(critic), report.n_kept, report.n_in);
    return report;
}

}  // namespace

FilterResult apply_filter(const FilterPolicy& policy, std::span<SyntheticExample> s_g,
                          std::span<SyntheticExample> s_r, const models::GeneratorModel& generator,
                          const models::RetrieverModel& retriever, unsigned threads)
{
    policy.validate();
    FilterResult result;
    if (!s_g.empty()) {
        result.generator_set = filter_set(policy, Task::qg, s_g, generator, retriever, threads);
    }
    if (!s_r.empty()) {
        result.retriever_set = filter_set(policy, Task::ir, s_r, generator, retriever, threads);
    }
    return result;
}

}  // namespace dualtrain::filters
