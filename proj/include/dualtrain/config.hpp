// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualtrain/adapt.hpp"
#include "dualtrain/evaluation.hpp"
#include "dualtrain/filters.hpp"
#include "dualtrain/models.hpp"
#include "dualtrain/plugin.hpp"

namespace dualtrain::config {

/// Invalid configuration. The message names the offending field path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainSettings {
    std::size_t epochs = 5;
    std::size_t batch = 32;
    double lr = 1e-5;
    double lr_scale = 5000.0;
};

struct GeneratorSettings {
    double copy_weight = 0.5;
    double smoothing = 0.1;
};

/// "native" | "plugin:<command>" for the generator;
/// "native-dual" | "native-bm25" | "plugin:<command>" for the retriever.
struct Backends {
    std::string generator = "native";
    std::string retriever = "native-dual";
};

struct AdaptSettings {
    augment::Direction mode = augment::Direction::back;
    augment::AdaptTask task = augment::AdaptTask::both;
    bool adapt_both = true;
    std::size_t dev_k = 40;
};

struct EvalSettings {
    std::vector<std::size_t> ks = eval::default_ks;
    eval::BleuSmoothing bleu_smoothing = eval::BleuSmoothing::none;
};

struct AnalysisSettings {
    double domain_alpha = 0.8;
    double domain_l2 = 0.1;
    /// Fraction of labeled questions held out for the precision/recall curve.
    double holdout_fraction = 0.2;
    /// JSON Lines of {"text": ..., "label": "in_domain"|"ood"}. Unset: target
    /// questions are in-domain and source questions out-of-domain.
    std::optional<std::string> domain_labels;
};

struct PluginSettings {
    std::int64_t handshake_timeout_ms = 30000;
    std::int64_t request_timeout_ms = 0;
};

/// Every field has a default, so `{}` is a complete configuration.
struct RunConfig {
    std::uint64_t seed = 13;
    std::optional<std::string> corpus;
    models::DecodeConfig decode;  // decode.seed defaults to seed
    filters::FilterPolicy filter;
    std::size_t negatives_k = 7;
    std::size_t max_iters = 2;
    std::size_t encoder_dim = 64;
    TrainSettings train;
    GeneratorSettings generator;
    Backends models;
    AdaptSettings adapt;
    EvalSettings eval;
    AnalysisSettings analysis;
    PluginSettings plugin;

    /// Parses with default filling. decode.seed falls back to `seed` when
    /// absent. Unknown keys and invalid values raise ConfigError.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig read(const std::filesystem::path& path);
    /// The effective configuration; from_json(to_json()) reproduces it.
    nlohmann::json to_json() const;
    void validate() const;

    bool decode_seed_explicit = false;
};

models::PluginOptions plugin_options(const RunConfig& config);

std::unique_ptr<models::GeneratorModel> make_generator(const RunConfig& config);
std::unique_ptr<models::RetrieverModel> make_retriever(const RunConfig& config);

augment::AdaptConfig adapt_config(const RunConfig& config, unsigned threads);

}  // namespace dualtrain::config
