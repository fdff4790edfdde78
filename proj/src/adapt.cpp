// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dualtrain/bm25.hpp"
#include "dualtrain/evaluation.hpp"
#include "dualtrain/parallel.hpp"
#include "dualtrain/rng.hpp"

namespace dualtrain::augment {

std::string_view to_string(AdaptTask task)
{
    switch (task) {
    case AdaptTask::qg: return "qg";
    case AdaptTask::ir: return "ir";
    case AdaptTask::both: return "both";
    }
    return "both";
}

AdaptTask parse_adapt_task(std::string_view text)
{
    if (text == "qg") {
        return AdaptTask::qg;
    }
    if (text == "ir") {
        return AdaptTask::ir;
    }
    if (text == "both") {
        return AdaptTask::both;
    }
    throw std::invalid_argument(fmt::format("unknown task \"{}\" (expected qg, ir or both)", text));
}

nlohmann::json AdaptationHistory::to_json() const
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : iterations) {
        nlohmann::json row = {{"t", r.t},
                              {"dev_metric", r.dev_metric},
                              {"sg_size", r.sg_size},
                              {"sr_size", r.sr_size},
                              {"kept_frac_g", r.kept_frac_g},
                              {"kept_frac_r", r.kept_frac_r},
                              {"best", r.best}};
        if (r.dev_qg) {
            row["dev_qg"] = *r.dev_qg;
        }
        if (r.dev_ir) {
            row["dev_ir"] = *r.dev_ir;
        }
        if (r.filter_g) {
            row["filter_g"] = r.filter_g->to_json();
        }
        if (r.filter_r) {
            row["filter_r"] = r.filter_r->to_json();
        }
        rows.push_back(std::move(row));
    }
    return {{"iterations", rows}, {"best_t", best_t}, {"net_gain", net_gain}};
}

double contrastive_loss(const models::RetrieverModel& retriever, std::span<const models::RetrievalExample> examples,
                        unsigned threads)
{
    if (examples.empty()) {
        return 0.0;
    }
    const auto losses = parallel_map(examples.size(), threads, [&](std::size_t i) {
        const auto& ex = examples[i];
        std::vector<double> s;
        s.push_back(retriever.score(ex.question, ex.positive));
        for (const auto& neg : ex.negatives) {
            s.push_back(retriever.score(ex.question, neg));
        }
        const double top = *std::max_element(s.begin(), s.end());
        double sum = 0.0;
        for (const double v : s) {
            sum += std::exp(v - top);
        }
        return top + std::log(sum) - s.front();
    });
    double total = 0.0;
    for (const double l : losses) {
        total += l;
    }
    return total / static_cast<double>(examples.size());
}

DevScores default_dev_scores(const models::GeneratorModel& generator, models::RetrieverModel& retriever,
                             const corpus::CorpusBundle& bundle, AdaptTask task, const models::DecodeConfig& decode,
                             std::size_t k, unsigned threads)
{
    if (bundle.dev_pairs.empty()) {
        throw eval::EmptySplitError("evaluation split target_dev is empty");
    }
    DevScores scores;
    if (task != AdaptTask::ir) {
        std::vector<std::string> passages;
        for (const auto& pair : bundle.dev_pairs) {
            passages.push_back(pair.passage.text);
        }
        const auto generated = eval::generate_questions(generator, passages, decode, threads);
        std::vector<eval::Tokens> hyps;
        std::vector<eval::Tokens> refs;
        for (std::size_t i = 0; i < generated.size(); ++i) {
            hyps.push_back(corpus::tokenize(generated[i]));
            refs.push_back(corpus::tokenize(bundle.dev_pairs[i].question.text));
        }
        scores.qg = 100.0 * eval::bleu(hyps, refs, 4);
    }
    if (task != AdaptTask::qg) {
        const std::vector<std::size_t> ks = {k};
        scores.ir = 100.0 * eval::topk_accuracy(retriever, bundle.dev_pairs, bundle.candidate_passages, ks, threads).at(k);
    }
    return scores;
}

namespace {

double kept_fraction(std::span<const SyntheticExample> set)
{
    if (set.empty()) {
        return 0.0;
    }
    const auto kept = std::count_if(set.begin(), set.end(), [](const auto& e) { return e.kept; });
    return static_cast<double>(kept) / static_cast<double>(set.size());
}

std::vector<models::QgPair> source_qg_pairs(const corpus::CorpusBundle& bundle)
{
    std::vector<models::QgPair> out;
    for (const auto& p : bundle.source_pairs) {
        out.push_back({p.passage.text, p.question.text});
    }
    return out;
}

std::vector<models::QgPair> dev_qg_pairs(const corpus::CorpusBundle& bundle)
{
    std::vector<models::QgPair> out;
    for (const auto& p : bundle.dev_pairs) {
        out.push_back({p.passage.text, p.question.text});
    }
    return out;
}

}  // namespace

std::vector<models::RetrievalExample> mined_retrieval_examples(std::span<const corpus::AlignedPair> pairs,
                                                     std::span<const corpus::Passage> pool, std::size_t k_neg)
{
    models::Bm25Retriever bm25;
    bm25.index(pool);
    std::unordered_map<std::string_view, const std::string*> text_by_id;
    for (const auto& p : pool) {
        text_by_id.emplace(p.id, &p.text);
    }
    std::vector<models::RetrievalExample> out;
    for (const auto& pair : pairs) {
        models::RetrievalExample ex{pair.question.text, pair.passage.text, {}};
        for (const auto& id : models::mine_negatives(pair.question, pair.passage.id, bm25, k_neg).negative_passage_ids) {
            ex.negatives.push_back(*text_by_id.at(id));
        }
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<corpus::Passage> unique_passages(std::span<const corpus::AlignedPair> pairs)
{
    std::vector<corpus::Passage> out;
    std::unordered_map<std::string, bool> seen;
    for (const auto& p : pairs) {
        if (seen.emplace(p.passage.id, true).second) {
            out.push_back(p.passage);
        }
    }
    return out;
}

AdaptResult adapt(const AdaptConfig& config, const corpus::CorpusBundle& bundle,
                  const models::GeneratorModel& generator, const models::RetrieverModel& retriever,
                  const DevMetricFn& dev_metric)
{
    if (config.max_iters < 1) {
        throw std::invalid_argument("max_iters must be >= 1");
    }
    if (bundle.dev_pairs.empty()) {
        throw eval::EmptySplitError("evaluation split target_dev is empty");
    }
    if (bundle.target_passages.empty() || bundle.target_questions.empty()) {
        throw std::invalid_argument("adaptation needs target passages and target questions");
    }
    config.filter.validate();
    config.decode.validate();

    const bool track_qg = config.task != AdaptTask::ir;
    const bool track_ir = config.task != AdaptTask::qg;
    const bool build_g = track_qg || config.adapt_both;
    const bool build_r = track_ir || config.adapt_both;

    auto gen = generator.clone();
    auto ret = retriever.clone();
    if (build_r && !ret->trainable()) {
        spdlog::info("retriever \"{}\" has no trainable parameters; S_R is built and filtered but not used",
                     ret->name());
    }

    models::Bm25Retriever negative_pool;
    std::unordered_map<std::string, std::vector<std::string>> negative_cache;
    std::unordered_map<std::string_view, const corpus::Passage*> target_by_id;
    for (const auto& p : bundle.target_passages) {
        target_by_id.emplace(p.id, &p);
    }
    if (build_r && ret->trainable()) {
        negative_pool.index(bundle.target_passages);
    }

    // Trajectory inputs, fixed for the whole run.
    const auto dev_pairs_qg = dev_qg_pairs(bundle);
    const bool log_qg = gen->can_score();
    const bool log_ir = ret->can_score();
    std::vector<models::RetrievalExample> dev_ir_examples;
    std::vector<models::RetrievalExample> source_ir_examples;
    if (log_ir) {
        dev_ir_examples = mined_retrieval_examples(bundle.dev_pairs, bundle.candidate_passages, config.negatives_k);
        const auto source_pool = unique_passages(bundle.source_pairs);
        if (source_pool.size() > 1) {
            source_ir_examples = mined_retrieval_examples(bundle.source_pairs, source_pool, config.negatives_k);
        }
    }

    AdaptResult result;
    auto log_point = [&](std::size_t step, std::span<const models::QgPair> qg_train,
                         std::span<const models::RetrievalExample> ir_train) {
        if (log_qg) {
            const auto train = analysis::corpus_nll(*gen, qg_train, config.threads);
            const auto dev = analysis::corpus_nll(*gen, dev_pairs_qg, config.threads);
            result.qg_trajectory.append({step, train.per_token(), dev.per_token(), dev});
        }
        if (log_ir) {
            // BM25 scores read the statistics of whatever pool is indexed.
            ret->index(bundle.candidate_passages);
            result.ir_trajectory.append(
                {step, contrastive_loss(*ret, ir_train, config.threads),
                 contrastive_loss(*ret, dev_ir_examples, config.threads), std::nullopt});
        }
    };
    log_point(0, source_qg_pairs(bundle), source_ir_examples);

    std::unique_ptr<models::GeneratorModel> best_gen;
    std::unique_ptr<models::RetrieverModel> best_ret;
    std::vector<SyntheticExample> best_synthetic;
    std::optional<DevScores> previous;

    for (std::size_t t = 1; t <= config.max_iters; ++t) {
        const auto started = std::chrono::steady_clock::now();
        IterationRecord record;
        record.t = t;

        models::DecodeConfig decode = config.decode;
        decode.seed = derive_seed(config.decode.seed, t);
        ret->index(bundle.target_passages);

        std::vector<SyntheticExample> s_g;
        std::vector<SyntheticExample> s_r;
        if (build_g) {
            s_g = build_synthetic(config.mode, Task::qg, *gen, *ret, bundle.target_passages, bundle.target_questions,
                                  decode, config.threads);
            if (s_g.empty()) {
                throw std::runtime_error(fmt::format("iteration {}: no synthetic data for S_G", t));
            }
        }
        if (build_r) {
            s_r = build_synthetic(config.mode, Task::ir, *gen, *ret, bundle.target_passages, bundle.target_questions,
                                  decode, config.threads);
            if (s_r.empty()) {
                throw std::runtime_error(fmt::format("iteration {}: no synthetic data for S_R", t));
            }
        }
        const auto reports = filters::apply_filter(config.filter, s_g, s_r, *gen, *ret, config.threads);
        record.filter_g = reports.generator_set;
        record.filter_r = reports.retriever_set;
        for (const auto* report : {&reports.generator_set, &reports.retriever_set}) {
            if (*report && (*report)->n_kept == 0) {
                throw std::runtime_error(fmt::format(
                    "iteration {}: the {} filter (critic {}, threshold {}) removed every synthetic {} example", t,
                    filters::to_string(config.filter.kind), filters::to_string((*report)->critic),
                    (*report)->threshold, report == &reports.generator_set ? "S_G" : "S_R"));
            }
        }
        record.sg_size = s_g.size();
        record.sr_size = s_r.size();
        record.kept_frac_g = kept_fraction(s_g);
        record.kept_frac_r = kept_fraction(s_r);

        const auto qg_train = kept_qg_pairs(s_g);
        if (build_g) {
            gen->fine_tune(qg_train);
        }
        std::vector<models::RetrievalExample> ir_train;
        for (const auto& e : s_r) {
            if (!e.kept || !ret->trainable()) {
                continue;
            }
            const bool back = e.direction == Direction::back;
            const std::string& key = back ? *e.source_passage_id : *e.source_question_id;
            auto cached = negative_cache.find(key);
            if (cached == negative_cache.end()) {
                const auto q = corpus::make_question(key, e.question());
                std::vector<std::string> texts;
                for (const auto& id :
                     models::mine_negatives(q, *e.source_passage_id, negative_pool, config.negatives_k)
                         .negative_passage_ids) {
                    texts.push_back(target_by_id.at(id)->text);
                }
                cached = negative_cache.emplace(key, std::move(texts)).first;
            }
            ir_train.push_back({e.question(), e.passage(), cached->second});
        }
        if (!ir_train.empty()) {
            ret->fine_tune(ir_train);
        }
        log_point(t, qg_train, ir_train);

        DevScores dev = dev_metric ? dev_metric(*gen, *ret, t)
                                   : default_dev_scores(*gen, *ret, bundle, config.task, config.decode, config.dev_k,
                                                        config.threads);
        if ((track_qg && !dev.qg) || (track_ir && !dev.ir)) {
            throw std::logic_error("dev metric did not report the tracked task");
        }
        record.dev_qg = track_qg ? dev.qg : std::nullopt;
        record.dev_ir = track_ir ? dev.ir : std::nullopt;
        record.dev_metric = track_qg && track_ir ? (*dev.qg + *dev.ir) / 2.0 : (track_qg ? *dev.qg : *dev.ir);
        record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        spdlog::info("iteration {}: dev {:.4f} |S_G|={} |S_R|={} kept {:.3f}/{:.3f}", t, record.dev_metric,
                     record.sg_size, record.sr_size, record.kept_frac_g, record.kept_frac_r);

        const bool decreased = previous && ((track_qg && *dev.qg < *previous->qg) ||
                                            (track_ir && *dev.ir < *previous->ir));
        result.history.iterations.push_back(record);
        if (decreased) {
            spdlog::info("dev metric decreased at iteration {}; keeping iteration {}", t, t - 1);
            break;
        }
        previous = dev;
        best_gen = gen->clone();
        best_ret = ret->clone();
        best_synthetic = s_g;
        best_synthetic.insert(best_synthetic.end(), s_r.begin(), s_r.end());
        result.history.best_t = t;
    }

    auto& history = result.history;
    history.iterations[history.best_t - 1].best = true;
    history.net_gain = history.iterations[history.best_t - 1].dev_metric - history.iterations.front().dev_metric;
    result.generator = std::move(best_gen);
    result.retriever = std::move(best_ret);
    result.synthetic = std::move(best_synthetic);
    return result;
}

}  // namespace dualtrain::augment
