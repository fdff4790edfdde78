// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/models.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dualtrain/bm25.hpp"
#include "dualtrain/dual_encoder.hpp"
#include "dualtrain/ngram_generator.hpp"
#include "dualtrain/plugin.hpp"

namespace dualtrain::models {

void DecodeConfig::validate() const
{
    if (top_k < 1) {
        throw std::invalid_argument("decode: top_k must be >= 1");
    }
    if (max_length < 1) {
        throw std::invalid_argument("decode: max_length must be >= 1");
    }
}

std::size_t GeneratorModel::scored_length(std::string_view question) const
{
    return corpus::tokenize(question).size() + 1;
}

std::vector<ScoredPassage> rank_top_k(std::vector<ScoredPassage> candidates, std::size_t k)
{
    const std::size_t keep = std::min(k, candidates.size());
    auto before = [](const ScoredPassage& a, const ScoredPassage& b) {
        return a.score > b.score || (a.score == b.score && a.id < b.id);
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      before);
    candidates.resize(keep);
    return candidates;
}

void write_checkpoint(const std::filesystem::path& path, const nlohmann::json& body)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ModelError("cannot write checkpoint " + path.string());
    }
    out << checkpoint_magic << '\n' << body.dump() << '\n';
    if (!out) {
        throw ModelError("failed writing checkpoint " + path.string());
    }
}

nlohmann::json read_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ModelError("cannot open checkpoint " + path.string());
    }
    std::string magic;
    std::getline(in, magic);
    if (magic != checkpoint_magic) {
        throw ModelError(path.string() + ": not a checkpoint (bad magic header)");
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(path.string() + ": corrupt checkpoint body: " + e.what());
    }
}

std::unique_ptr<GeneratorModel> load_generator(const std::filesystem::path& path)
{
    const auto body = read_checkpoint(path);
    const auto model = body.value("model", std::string{});
    if (model == "ngram_copy") {
        return std::make_unique<NgramCopyGenerator>(NgramCopyGenerator::from_json(body));
    }
    if (model == "plugin") {
        return attach_generator(body.at("command").get<std::string>());
    }
    throw ModelError(path.string() + ": checkpoint holds \"" + model + "\", not a generator");
}

std::unique_ptr<RetrieverModel> load_retriever(const std::filesystem::path& path)
{
    const auto body = read_checkpoint(path);
    const auto model = body.value("model", std::string{});
    if (model == "bm25") {
        return std::make_unique<Bm25Retriever>(Bm25Config::from_json(body.at("config")));
    }
    if (model == "dual_encoder") {
        return std::make_unique<DualEncoder>(DualEncoder::from_json(body));
    }
    if (model == "plugin") {
        return attach_retriever(body.at("command").get<std::string>());
    }
    throw ModelError(path.string() + ": checkpoint holds \"" + model + "\", not a retriever");
}

}  // namespace dualtrain::models
