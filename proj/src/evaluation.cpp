// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dualtrain/parallel.hpp"
#include "dualtrain/rng.hpp"

namespace dualtrain::eval {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what)
{
    if (a != b) {
        throw EvalError(fmt::format("{}: {} hypotheses but {} references", what, a, b));
    }
}

struct NgramHash {
    std::size_t operator()(const std::vector<std::string_view>& gram) const noexcept
    {
        std::size_t h = 0;
        for (const auto& w : gram) {
            h = h * 1000003U ^ std::hash<std::string_view>{}(w);
        }
        return h;
    }
};

using NgramCounts = std::unordered_map<std::vector<std::string_view>, std::size_t, NgramHash>;

NgramCounts count_ngrams(const Tokens& tokens, std::size_t n)
{
    NgramCounts counts;
    if (tokens.size() < n) {
        return counts;
    }
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::vector<std::string_view> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                           tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
        ++counts[gram];
    }
    return counts;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b)
{
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// Depth-first search over hypothesis positions for the alignment with the
// most adjacent links (chunks = matches - links), all words matched maximally.
class AlignmentSearch {
public:
    AlignmentSearch(const Tokens& hyp, const Tokens& ref) : hyp_(hyp)
    {
        for (std::size_t j = 0; j < ref.size(); ++j) {
            ref_positions_[ref[j]].push_back(j);
        }
        std::unordered_map<std::string, std::size_t> hyp_counts;
        for (const auto& w : hyp) {
            ++hyp_counts[w];
        }
        for (const auto& [w, ch] : hyp_counts) {
            auto it = ref_positions_.find(w);
            const std::size_t cr = it == ref_positions_.end() ? 0 : it->second.size();
            target_[w] = std::min(ch, cr);
            matches_ += target_[w];
        }
        remaining_occurrences_ = hyp_counts;
        used_.assign(ref.size(), false);
    }

    MeteorAlignment run()
    {
        if (matches_ == 0) {
            return {};
        }
        visit(0, -2, 0);
        return {matches_, matches_ - best_links_};
    }

private:
    static constexpr std::size_t budget = 200000;

    void visit(std::size_t i, long prev_ref, std::size_t links)
    {
        if (++nodes_ > budget && found_) {
            return;
        }
        if (i == hyp_.size()) {
            if (!found_ || links > best_links_) {
                best_links_ = links;
                found_ = true;
            }
            return;
        }
        if (found_ && links + (hyp_.size() - i) <= best_links_) {
            return;
        }
        const std::string& w = hyp_[i];
        auto& remaining = remaining_occurrences_[w];
        --remaining;
        const std::size_t need = target_[w] - matched_[w];

        if (need > 0) {
            const auto& positions = ref_positions_[w];
            // Try the position continuing the current chunk first.
            std::vector<std::size_t> order;
            order.reserve(positions.size());
            for (const std::size_t j : positions) {
                if (!used_[j] && static_cast<long>(j) == prev_ref + 1) {
                    order.push_back(j);
                }
            }
            for (const std::size_t j : positions) {
                if (!used_[j] && static_cast<long>(j) != prev_ref + 1) {
                    order.push_back(j);
                }
            }
            for (const std::size_t j : order) {
                used_[j] = true;
                ++matched_[w];
                visit(i + 1, static_cast<long>(j), links + (static_cast<long>(j) == prev_ref + 1 ? 1 : 0));
                --matched_[w];
                used_[j] = false;
            }
        }
        if (remaining >= need) {
            visit(i + 1, -2, links);
        }
        ++remaining;
    }

    const Tokens& hyp_;
    std::unordered_map<std::string, std::vector<std::size_t>> ref_positions_;
    std::unordered_map<std::string, std::size_t> target_;
    std::unordered_map<std::string, std::size_t> matched_;
    std::unordered_map<std::string, std::size_t> remaining_occurrences_;
    std::vector<bool> used_;
    std::size_t matches_ = 0;
    std::size_t best_links_ = 0;
    std::size_t nodes_ = 0;
    bool found_ = false;
};

}  // namespace

double bleu(std::span<const Tokens> hypotheses, std::span<const Tokens> references, int max_n, BleuSmoothing smoothing)
{
    require_same_length(hypotheses.size(), references.size(), "bleu");
    if (max_n < 1) {
        throw EvalError("bleu: max_n must be >= 1");
    }
    std::size_t hyp_len = 0;
    std::size_t ref_len = 0;
    std::vector<double> matched(static_cast<std::size_t>(max_n), 0.0);
    std::vector<double> total(static_cast<std::size_t>(max_n), 0.0);
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        hyp_len += hypotheses[i].size();
        ref_len += references[i].size();
        for (int n = 1; n <= max_n; ++n) {
            const auto hyp_counts = count_ngrams(hypotheses[i], static_cast<std::size_t>(n));
            const auto ref_counts = count_ngrams(references[i], static_cast<std::size_t>(n));
            for (const auto& [gram, c] : hyp_counts) {
                auto it = ref_counts.find(gram);
                if (it != ref_counts.end()) {
                    matched[n - 1] += static_cast<double>(std::min(c, it->second));
                }
                total[n - 1] += static_cast<double>(c);
            }
        }
    }
    if (hyp_len == 0) {
        return 0.0;
    }
    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        double m = matched[n - 1];
        double t = total[n - 1];
        if (smoothing == BleuSmoothing::add_one && n >= 2) {
            m += 1.0;
            t += 1.0;
        }
        if (m == 0.0 || t == 0.0) {
            return 0.0;
        }
        log_sum += std::log(m / t);
    }
    const double c = static_cast<double>(hyp_len);
    const double r = static_cast<double>(ref_len);
    const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    return bp * std::exp(log_sum / max_n);
}

double rouge_l(const Tokens& hypothesis, const Tokens& reference)
{
    if (hypothesis.empty() || reference.empty()) {
        return 0.0;
    }
    const double lcs = static_cast<double>(lcs_length(hypothesis, reference));
    const double p = lcs / static_cast<double>(hypothesis.size());
    const double r = lcs / static_cast<double>(reference.size());
    if (p + r == 0.0) {
        return 0.0;
    }
    return 2.0 * p * r / (p + r);
}

double rouge_l(std::span<const Tokens> hypotheses, std::span<const Tokens> references)
{
    require_same_length(hypotheses.size(), references.size(), "rouge_l");
    if (hypotheses.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        sum += rouge_l(hypotheses[i], references[i]);
    }
    return sum / static_cast<double>(hypotheses.size());
}

MeteorAlignment meteor_align(const Tokens& hypothesis, const Tokens& reference)
{
    return AlignmentSearch(hypothesis, reference).run();
}

double meteor_lite(const Tokens& hypothesis, const Tokens& reference, const MeteorParams& params)
{
    const auto alignment = meteor_align(hypothesis, reference);
    if (alignment.matches == 0) {
        return 0.0;
    }
    const double m = static_cast<double>(alignment.matches);
    const double p = m / static_cast<double>(hypothesis.size());
    const double r = m / static_cast<double>(reference.size());
    const double fmean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
    const double penalty = params.gamma * std::pow(static_cast<double>(alignment.chunks) / m, params.beta);
    return fmean * (1.0 - penalty);
}

double meteor_lite(std::span<const Tokens> hypotheses, std::span<const Tokens> references, const MeteorParams& params)
{
    require_same_length(hypotheses.size(), references.size(), "meteor_lite");
    if (hypotheses.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        sum += meteor_lite(hypotheses[i], references[i], params);
    }
    return sum / static_cast<double>(hypotheses.size());
}

std::map<std::size_t, double> topk_accuracy(models::RetrieverModel& retriever, std::span<const corpus::AlignedPair> pairs,
                                            std::span<const corpus::Passage> pool, std::span<const std::size_t> ks,
                                            unsigned threads)
{
    if (ks.empty()) {
        throw EvalError("topk_accuracy: no cutoffs given");
    }
    if (!std::is_sorted(ks.begin(), ks.end()) || ks.front() == 0) {
        throw EvalError("topk_accuracy: cutoffs must be positive and ascending");
    }
    std::unordered_set<std::string> pool_ids;
    for (const auto& p : pool) {
        pool_ids.insert(p.id);
    }
    for (const auto& pair : pairs) {
        if (!pool_ids.contains(pair.passage.id)) {
            throw EvalError("topk_accuracy: gold passage \"" + pair.passage.id + "\" is absent from the pool");
        }
    }
    retriever.index(pool);
    const std::size_t depth = ks.back();
    // rank 0 means "not within depth"
    const auto ranks = parallel_map(pairs.size(), threads, [&](std::size_t i) -> std::size_t {
        const auto hits = retriever.retrieve(pairs[i].question.text, depth);
        for (std::size_t r = 0; r < hits.size(); ++r) {
            if (hits[r].id == pairs[i].passage.id) {
                return r + 1;
            }
        }
        return 0;
    });
    std::map<std::size_t, double> accuracy;
    for (const std::size_t k : ks) {
        std::size_t hit = 0;
        for (const std::size_t rank : ranks) {
            if (rank != 0 && rank <= k) {
                ++hit;
            }
        }
        accuracy[k] = pairs.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(pairs.size());
    }
    return accuracy;
}

QgScores score_generations(std::span<const Tokens> hypotheses, std::span<const Tokens> references,
                           BleuSmoothing smoothing)
{
    QgScores s;
    s.b1 = bleu(hypotheses, references, 1, smoothing);
    s.b2 = bleu(hypotheses, references, 2, smoothing);
    s.b3 = bleu(hypotheses, references, 3, smoothing);
    s.b4 = bleu(hypotheses, references, 4, smoothing);
    s.meteor = meteor_lite(hypotheses, references);
    s.rouge_l = rouge_l(hypotheses, references);
    return s;
}

nlohmann::json EvalReport::to_json() const
{
    nlohmann::json j;
    if (qg) {
        j["qg"] = {{"b1", qg->b1},       {"b2", qg->b2},         {"b3", qg->b3},
                   {"b4", qg->b4},       {"meteor", qg->meteor}, {"rouge_l", qg->rouge_l}};
    } else {
        j["qg"] = nullptr;
    }
    nlohmann::json ir = nlohmann::json::object();
    for (const auto& [k, acc] : r_at) {
        ir["r@" + std::to_string(k)] = acc;
    }
    j["ir"] = ir;
    j["n_eval"] = n_eval;
    j["pool"] = candidate_pool_size;
    return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j)
{
    EvalReport r;
    if (j.contains("qg") && !j["qg"].is_null()) {
        const auto& q = j["qg"];
        r.qg = QgScores{q.at("b1").get<double>(),     q.at("b2").get<double>(),     q.at("b3").get<double>(),
                        q.at("b4").get<double>(),     q.at("meteor").get<double>(), q.at("rouge_l").get<double>()};
    }
    for (const auto& [key, value] : j.at("ir").items()) {
        if (key.rfind("r@", 0) != 0) {
            throw EvalError("report: unexpected ir key \"" + key + "\"");
        }
        r.r_at[std::stoul(key.substr(2))] = value.get<double>();
    }
    r.n_eval = j.at("n_eval").get<std::size_t>();
    r.candidate_pool_size = j.at("pool").get<std::size_t>();
    return r;
}

std::string EvalReport::to_csv() const
{
    std::string header = "B1,B2,B3,B4,M,R";
    std::string row;
    auto cell = [](std::optional<double> v) { return v ? fmt::format("{:.2f}", *v * 100.0) : std::string{}; };
    if (qg) {
        row = fmt::format("{},{},{},{},{},{}", cell(qg->b1), cell(qg->b2), cell(qg->b3), cell(qg->b4), cell(qg->meteor),
                          cell(qg->rouge_l));
    } else {
        row = ",,,,,";
    }
    for (const auto& [k, acc] : r_at) {
        header += fmt::format(",R@{}", k);
        row += "," + cell(acc);
    }
    return header + "\n" + row + "\n";
}

std::vector<std::string> generate_questions(const models::GeneratorModel& generator,
                                            const std::vector<std::string>& passages,
                                            const models::DecodeConfig& decode, unsigned threads)
{
    return parallel_map(passages.size(), threads, [&](std::size_t i) -> std::string {
        models::DecodeConfig item = decode;
        item.seed = derive_seed(decode.seed, i);
        try {
            return generator.generate(passages[i], item).question;
        } catch (const std::exception& e) {
            spdlog::warn("generation failed for item {}: {}", i, e.what());
            return {};
        }
    });
}

EvalReport evaluate(const models::GeneratorModel& generator, models::RetrieverModel& retriever,
                    const corpus::CorpusBundle& bundle, corpus::Split split, const EvalOptions& options)
{
    const std::vector<corpus::AlignedPair>* pairs = nullptr;
    switch (split) {
    case corpus::Split::target_dev: pairs = &bundle.dev_pairs; break;
    case corpus::Split::target_test: pairs = &bundle.test_pairs; break;
    case corpus::Split::source_train: pairs = &bundle.source_pairs; break;
    }
    if (pairs->empty()) {
        throw EmptySplitError(fmt::format("evaluation split {} is empty", corpus::to_string(split)));
    }

    EvalReport report;
    report.n_eval = pairs->size();
    report.candidate_pool_size = bundle.candidate_passages.size();
    if (options.qg) {
        std::vector<std::string> passages;
        passages.reserve(pairs->size());
        for (const auto& p : *pairs) {
            passages.push_back(p.passage.text);
        }
        const auto generated = generate_questions(generator, passages, options.decode, options.threads);
        std::vector<Tokens> hyps;
        std::vector<Tokens> refs;
        for (std::size_t i = 0; i < pairs->size(); ++i) {
            hyps.push_back(corpus::tokenize(generated[i]));
            refs.push_back(corpus::tokenize((*pairs)[i].question.text));
        }
        report.qg = score_generations(hyps, refs, options.smoothing);
    }
    if (options.ir) {
        report.r_at = topk_accuracy(retriever, *pairs, bundle.candidate_passages, options.ks, options.threads);
    }
    return report;
}

}  // namespace dualtrain::eval
