// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/ngram_generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dualtrain/rng.hpp"

namespace dualtrain::models {

void NgramCopyConfig::validate() const
{
    if (!(copy_weight >= 0.0 && copy_weight <= 1.0)) {
        throw std::invalid_argument("ngram_copy: copy_weight must be in [0, 1]");
    }
    if (!(smoothing >= 0.0)) {
        throw std::invalid_argument("ngram_copy: smoothing must be >= 0");
    }
    if (batch == 0) {
        throw std::invalid_argument("ngram_copy: batch must be >= 1");
    }
}

nlohmann::json NgramCopyConfig::to_json() const
{
    return {{"copy_weight", copy_weight}, {"smoothing", smoothing}, {"batch", batch}};
}

NgramCopyConfig NgramCopyConfig::from_json(const nlohmann::json& j)
{
    NgramCopyConfig c;
    c.copy_weight = j.value("copy_weight", c.copy_weight);
    c.smoothing = j.value("smoothing", c.smoothing);
    c.batch = j.value("batch", c.batch);
    c.validate();
    return c;
}

NgramCopyGenerator::NgramCopyGenerator(NgramCopyConfig config) : config_(config)
{
    config_.validate();
    reset();
}

void NgramCopyGenerator::reset()
{
    vocab_ = {"<bos>", "<eos>", "<unk>"};
    ids_.clear();
    for (int i = 0; i < static_cast<int>(vocab_.size()); ++i) {
        ids_.emplace(vocab_[i], i);
    }
    bigrams_.assign(vocab_.size(), {});
    row_totals_.assign(vocab_.size(), 0.0);
    steps_ = 0;
}

int NgramCopyGenerator::intern(const std::string& token)
{
    auto [it, inserted] = ids_.emplace(token, static_cast<int>(vocab_.size()));
    if (inserted) {
        vocab_.push_back(token);
        bigrams_.emplace_back();
        row_totals_.push_back(0.0);
    }
    return it->second;
}

int NgramCopyGenerator::lookup(const std::string& token) const
{
    auto it = ids_.find(token);
    if (it == ids_.end() || it->second <= unk_id) {
        return unk_id;
    }
    return it->second;
}

void NgramCopyGenerator::count(std::span<const QgPair> pairs)
{
    std::size_t in_batch = 0;
    for (const auto& pair : pairs) {
        int prev = bos_id;
        for (const auto& token : corpus::tokenize(pair.question)) {
            // Reserved spellings such as "<unk>" never tokenize to themselves
            // after punctuation stripping, so intern() only sees real words.
            const int id = intern(token);
            bigrams_[prev][id] += 1.0;
            row_totals_[prev] += 1.0;
            prev = id;
        }
        bigrams_[prev][eos_id] += 1.0;
        row_totals_[prev] += 1.0;
        if (++in_batch == config_.batch) {
            notify(++steps_);
            in_batch = 0;
        }
    }
    if (in_batch != 0) {
        notify(++steps_);
    }
}

void NgramCopyGenerator::train(std::span<const QgPair> pairs)
{
    if (pairs.empty()) {
        throw ModelError("ngram_copy: empty training set");
    }
    reset();
    count(pairs);
}

void NgramCopyGenerator::fine_tune(std::span<const QgPair> pairs)
{
    if (pairs.empty()) {
        throw ModelError("ngram_copy: empty fine-tuning set");
    }
    count(pairs);
}

std::unordered_map<int, double> NgramCopyGenerator::copy_distribution(std::string_view passage) const
{
    std::unordered_map<int, double> copy;
    double total = 0.0;
    for (const auto& token : corpus::tokenize(passage)) {
        const int id = lookup(token);
        if (id != unk_id) {
            copy[id] += 1.0;
            total += 1.0;
        }
    }
    for (auto& [id, mass] : copy) {
        mass /= total;
    }
    return copy;
}

double NgramCopyGenerator::probability(int prev, int next, const std::unordered_map<int, double>& copy) const
{
    const double outcomes = static_cast<double>(vocab_.size() - 1);
    const double denom = row_totals_[prev] + config_.smoothing * outcomes;
    double bigram = 1.0 / outcomes;
    if (denom > 0.0) {
        const auto& row = bigrams_[prev];
        auto it = row.find(next);
        const double c = it == row.end() ? 0.0 : it->second;
        bigram = (c + config_.smoothing) / denom;
    }
    if (copy.empty()) {
        return bigram;
    }
    auto it = copy.find(next);
    const double copied = it == copy.end() ? 0.0 : it->second;
    return config_.copy_weight * copied + (1.0 - config_.copy_weight) * bigram;
}

double NgramCopyGenerator::score(std::string_view passage, std::string_view question) const
{
    const auto copy = copy_distribution(passage);
    double loglik = 0.0;
    int prev = bos_id;
    for (const auto& token : corpus::tokenize(question)) {
        const int id = lookup(token);
        loglik += std::log(probability(prev, id, copy));
        prev = id;
    }
    loglik += std::log(probability(prev, eos_id, copy));
    return loglik;
}

Generation NgramCopyGenerator::generate(std::string_view passage, const DecodeConfig& decode) const
{
    decode.validate();
    if (vocab_.size() <= 3) {
        throw ModelError("ngram_copy: generate called on an untrained model");
    }
    const auto copy = copy_distribution(passage);
    const double mix = copy.empty() ? 0.0 : config_.copy_weight;
    const double outcomes = static_cast<double>(vocab_.size() - 1);

    Rng rng(decode.seed);
    std::vector<double> probs(vocab_.size());
    std::vector<int> candidates;
    std::vector<std::string> tokens;
    int prev = bos_id;
    for (int step = 0; step < decode.max_length; ++step) {
        const double denom = row_totals_[prev] + config_.smoothing * outcomes;
        if (denom > 0.0) {
            std::fill(probs.begin(), probs.end(), (1.0 - mix) * config_.smoothing / denom);
            for (const auto& [id, c] : bigrams_[prev]) {
                probs[id] += (1.0 - mix) * c / denom;
            }
        } else {
            std::fill(probs.begin(), probs.end(), (1.0 - mix) / outcomes);
        }
        for (const auto& [id, mass] : copy) {
            probs[id] += mix * mass;
        }

        candidates.clear();
        for (int id = eos_id; id < static_cast<int>(vocab_.size()); ++id) {
            if (id == unk_id || (id == eos_id && step == 0) || probs[id] <= 0.0) {
                continue;
            }
            candidates.push_back(id);
        }
        const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(decode.top_k), candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                          [&](int a, int b) { return probs[a] > probs[b] || (probs[a] == probs[b] && a < b); });
        candidates.resize(keep);

        double total = 0.0;
        for (const int id : candidates) {
            total += probs[id];
        }
        double u = rng.uniform() * total;
        int chosen = candidates.back();
        for (const int id : candidates) {
            u -= probs[id];
            if (u < 0.0) {
                chosen = id;
                break;
            }
        }
        if (chosen == eos_id) {
            break;
        }
        tokens.push_back(vocab_[chosen]);
        prev = chosen;
    }

    Generation g;
    g.question = corpus::join(tokens);
    g.loglik = score(passage, g.question);
    return g;
}

std::unique_ptr<GeneratorModel> NgramCopyGenerator::clone() const
{
    return std::make_unique<NgramCopyGenerator>(*this);
}

nlohmann::json NgramCopyGenerator::to_json() const
{
    std::vector<std::string> words(vocab_.begin() + 3, vocab_.end());
    nlohmann::json counts = nlohmann::json::array();
    for (std::size_t prev = 0; prev < bigrams_.size(); ++prev) {
        std::map<int, double> sorted(bigrams_[prev].begin(), bigrams_[prev].end());
        for (const auto& [next, c] : sorted) {
            counts.push_back({prev, next, c});
        }
    }
    return {{"model", name()}, {"version", 1}, {"config", config_.to_json()}, {"vocab", words}, {"bigrams", counts}};
}

NgramCopyGenerator NgramCopyGenerator::from_json(const nlohmann::json& j)
{
    NgramCopyGenerator g(NgramCopyConfig::from_json(j.at("config")));
    for (const auto& word : j.at("vocab")) {
        g.intern(word.get<std::string>());
    }
    const auto n = static_cast<int>(g.vocab_.size());
    for (const auto& entry : j.at("bigrams")) {
        const int prev = entry.at(0).get<int>();
        const int next = entry.at(1).get<int>();
        const double c = entry.at(2).get<double>();
        if (prev < 0 || prev >= n || next < 0 || next >= n) {
            throw ModelError("ngram_copy checkpoint: bigram id out of range");
        }
        g.bigrams_[prev][next] = c;
        g.row_totals_[prev] += c;
    }
    return g;
}

void NgramCopyGenerator::save(const std::filesystem::path& path) const
{
    write_checkpoint(path, to_json());
}

}  // namespace dualtrain::models
