// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/config.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <string_view>

#include <fmt/format.h>

#include "dualtrain/bm25.hpp"
#include "dualtrain/dual_encoder.hpp"
#include "dualtrain/ngram_generator.hpp"

namespace dualtrain::config {

namespace {

using nlohmann::json;

/// Walks one JSON object, tracking the dotted path for error messages and
/// rejecting keys nobody asked for.
class Fields {
public:
    Fields(const json& object, std::string path) : object_(object), path_(std::move(path))
    {
        if (!object_.is_object()) {
            throw ConfigError(fmt::format("config field \"{}\": expected an object", display(path_)));
        }
    }

    template <typename Fn>
    void on(const std::string& key, Fn&& fn)
    {
        const auto it = object_.find(key);
        if (it == object_.end()) {
            return;
        }
        seen_.insert(key);
        const std::string path = child(key);
        try {
            fn(*it, path);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(fmt::format("config field \"{}\": {}", path, e.what()));
        }
    }

    void finish() const
    {
        for (const auto& [key, value] : object_.items()) {
            if (!seen_.contains(key)) {
                throw ConfigError(fmt::format("unknown config field \"{}\"", child(key)));
            }
        }
    }

private:
    static std::string display(const std::string& path) { return path.empty() ? "<root>" : path; }
    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& object_;
    std::string path_;
    std::set<std::string> seen_;
};

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw ConfigError(fmt::format("config field \"{}\": {}", path, what));
}

// JSON parsers may store non-negative integers as signed.
bool non_negative_integer(const json& v)
{
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::size_t count(const json& v, const std::string& path, std::size_t min = 1)
{
    if (!non_negative_integer(v) || v.get<std::uint64_t>() < min) {
        fail(path, fmt::format("expected an integer >= {}", min));
    }
    return v.get<std::size_t>();
}

double number(const json& v, const std::string& path)
{
    if (!v.is_number()) {
        fail(path, "expected a number");
    }
    return v.get<double>();
}

std::string text(const json& v, const std::string& path)
{
    if (!v.is_string()) {
        fail(path, "expected a string");
    }
    return v.get<std::string>();
}

std::uint64_t seed_value(const json& v, const std::string& path)
{
    if (!non_negative_integer(v)) {
        fail(path, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::optional<double> optional_number(const json& v, const std::string& path)
{
    if (v.is_null()) {
        return std::nullopt;
    }
    return number(v, path);
}

json optional_json(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

bool valid_backend(const std::string& spec, std::initializer_list<std::string_view> natives)
{
    for (const auto n : natives) {
        if (spec == n) {
            return true;
        }
    }
    return spec.rfind("plugin:", 0) == 0 && spec.size() > 7;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j)
{
    RunConfig c;
    Fields root(j, "");
    root.on("seed", [&](const json& v, const std::string& p) { c.seed = seed_value(v, p); });
    root.on("corpus", [&](const json& v, const std::string& p) {
        if (!v.is_null()) {
            c.corpus = text(v, p);
        }
    });
    root.on("decode", [&](const json& v, const std::string& p) {
        Fields f(v, p);
        f.on("top_k", [&](const json& x, const std::string& q) { c.decode.top_k = static_cast<int>(count(x, q)); });
        f.on("max_length",
             [&](const json& x, const std::string& q) { c.decode.max_length = static_cast<int>(count(x, q)); });
        f.on("seed", [&](const json& x, const std::string& q) {
            c.decode.seed = seed_value(x, q);
            c.decode_seed_explicit = true;
        });
        f.finish();
    });
    root.on("filter", [&](const json& v, const std::string& p) {
        Fields f(v, p);
        f.on("kind", [&](const json& x, const std::string& q) {
            c.filter.kind = filters::parse_filter_kind(text(x, q));
        });
        f.on("accept_fraction", [&](const json& x, const std::string& q) {
            c.filter.accept_fraction = number(x, q);
            if (!(c.filter.accept_fraction > 0.0 && c.filter.accept_fraction <= 1.0)) {
                fail(q, "must be in (0, 1]");
            }
        });
        f.on("absolute_threshold", [&](const json& x, const std::string& q) {
            Fields t(x, q);
            t.on("generator", [&](const json& y, const std::string& r) { c.filter.absolute.generator = optional_number(y, r); });
            t.on("retriever", [&](const json& y, const std::string& r) { c.filter.absolute.retriever = optional_number(y, r); });
            t.finish();
        });
        f.finish();
    });
    root.on("negatives_k", [&](const json& v, const std::string& p) { c.negatives_k = count(v, p); });
    root.on("max_iters", [&](const json& v, const std::string& p) { c.max_iters = count(v, p); });
    root.on("encoder_dim", [&](const json& v, const std::string& p) { c.encoder_dim = count(v, p); });
    root.on("train", [&](const json& v, const std::string& p) {
        Fields f(v, p);
        f.on("epochs", [&](const json& x, const std::string& q) { c.train.epochs = count(x, q); });
        f.on("batch", [&](const json& x, const std::string& q) { c.train.batch = count(x, q); });
        f.on("lr", [&](const json& x, const std::string& q) {
            c.train.lr = number(x, q);
            if (!(c.train.lr > 0.0)) {
                fail(q, "must be > 0");
            }
        });
        f.on("lr_scale", [&](const json& x, const std::string& q) {
            c.train.lr_scale = number(x, q);
            if (!(c.train.lr_scale > 0.0)) {
                fail(q, "must be > 0");
            }
        });
        f.finish();
    });
    root.on("generator", [&](const json& v, const std::string& p) {
        Fields f(v, p);
        f.on("copy_weight", [&](const json& x, const std::string& q) {
            c.generator.copy_weight = number(x, q);
            if (!(c.generator.copy_weight >= 0.0 && c.generator.copy_weight <= 1.0)) {
                fail(q, "must be in [0, 1]");
            }
        });
        f.on("smoothing", [&](const json& x, const std::string& q) {
            c.generator.smoothing = number(x, q);
            if (!(c.generator.smoothing >= 0.0)) {
                fail(q, "must be >= 0");
            }
        });
        f.finish();
    });
    root.on("models", [&](const json& v, const std::string& p) {
        Fields f(v, p);
        f.on("generator", [&](const json& x, const std::string& q) {
            c.models.generator = text(x, q);
            if (!valid_backend(c.models.generator, {"native"})) {
                fail(q, "expected \"native\" or \"plugin:<command>\"");
            }
        });
        f.on("retriever", [&](const json& x, const std::string& q) {
            c.models.retriever = text(x, q);
            if (!valid_backend(c.models.retriever, {"native-dual", "native-bm25"})) {
                fail(q, "expected \"native-dual\", \"native-bm25\" or \"plugin:<command>\"");
            }
        });
        f.finish();
    });
    root.on("adapt", [&](const json& v, const std::string& p) {
        Fields f(v, p);
        f.on("mode", [&](const json& x, const std::string& q) { c.adapt.mode = augment::parse_direction(text(x, q)); });
        f.on("task", [&](const json& x, const std::string& q) { c.adapt.task = augment::parse_adapt_task(text(x, q)); });
        f.on("adapt_both", [&](const json& x, const std::string& q) {
            if (!x.is_boolean()) {
                fail(q, "expected a boolean");
            }
            c.adapt.adapt_both = x.get<bool>();
        });
        f.on("dev_k", [&](const json& x, const std::string& q) { c.adapt.dev_k = count(x, q); });
        f.finish();
    });
    root.on("eval", [&](const json& v, const std::string& p) {
        Fields f(v, p);
        f.on("ks", [&](const json& x, const std::string& q) {
            if (!x.is_array() || x.empty()) {
                fail(q, "expected a nonempty array of integers");
            }
            c.eval.ks.clear();
            for (const auto& k : x) {
                c.eval.ks.push_back(count(k, q));
            }
            if (!std::is_sorted(c.eval.ks.begin(), c.eval.ks.end()) ||
                std::adjacent_find(c.eval.ks.begin(), c.eval.ks.end()) != c.eval.ks.end()) {
                fail(q, "cutoffs must be strictly ascending");
            }
        });
        f.on("bleu_smoothing", [&](const json& x, const std::string& q) {
            const auto s = text(x, q);
            if (s == "none") {
                c.eval.bleu_smoothing = eval::BleuSmoothing::none;
            } else if (s == "add_one") {
                c.eval.bleu_smoothing = eval::BleuSmoothing::add_one;
            } else {
                fail(q, "expected \"none\" or \"add_one\"");
            }
        });
        f.finish();
    });
    root.on("analysis", [&](const json& v, const std::string& p) {
        Fields f(v, p);
        f.on("domain_alpha", [&](const json& x, const std::string& q) {
            c.analysis.domain_alpha = number(x, q);
            if (!(c.analysis.domain_alpha >= 0.0 && c.analysis.domain_alpha <= 1.0)) {
                fail(q, "must be in [0, 1]");
            }
        });
        f.on("domain_l2", [&](const json& x, const std::string& q) {
            c.analysis.domain_l2 = number(x, q);
            if (!(c.analysis.domain_l2 >= 0.0)) {
                fail(q, "must be >= 0");
            }
        });
        f.on("holdout_fraction", [&](const json& x, const std::string& q) {
            c.analysis.holdout_fraction = number(x, q);
            if (!(c.analysis.holdout_fraction > 0.0 && c.analysis.holdout_fraction < 1.0)) {
                fail(q, "must be in (0, 1)");
            }
        });
        f.on("domain_labels", [&](const json& x, const std::string& q) {
            if (!x.is_null()) {
                c.analysis.domain_labels = text(x, q);
            }
        });
        f.finish();
    });
    root.on("plugin", [&](const json& v, const std::string& p) {
        Fields f(v, p);
        f.on("handshake_timeout_ms", [&](const json& x, const std::string& q) {
            c.plugin.handshake_timeout_ms = static_cast<std::int64_t>(count(x, q));
        });
        f.on("request_timeout_ms", [&](const json& x, const std::string& q) {
            c.plugin.request_timeout_ms = static_cast<std::int64_t>(count(x, q, 0));
        });
        f.finish();
    });
    root.finish();
    if (!c.decode_seed_explicit) {
        c.decode.seed = c.seed;
    }
    c.validate();
    return c;
}

RunConfig RunConfig::read(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: malformed JSON at byte {}", path.string(), e.byte));
    }
    return from_json(j);
}

json RunConfig::to_json() const
{
    json ks = json::array();
    for (const auto k : eval.ks) {
        ks.push_back(k);
    }
    return {
        {"seed", seed},
        {"corpus", corpus ? json(*corpus) : json(nullptr)},
        {"decode", {{"top_k", decode.top_k}, {"max_length", decode.max_length}, {"seed", decode.seed}}},
        {"filter",
         {{"kind", filters::to_string(filter.kind)},
          {"accept_fraction", filter.accept_fraction},
          {"absolute_threshold",
           {{"generator", optional_json(filter.absolute.generator)},
            {"retriever", optional_json(filter.absolute.retriever)}}}}},
        {"negatives_k", negatives_k},
        {"max_iters", max_iters},
        {"encoder_dim", encoder_dim},
        {"train", {{"epochs", train.epochs}, {"batch", train.batch}, {"lr", train.lr}, {"lr_scale", train.lr_scale}}},
        {"generator", {{"copy_weight", generator.copy_weight}, {"smoothing", generator.smoothing}}},
        {"models", {{"generator", models.generator}, {"retriever", models.retriever}}},
        {"adapt",
         {{"mode", augment::to_string(adapt.mode)},
          {"task", augment::to_string(adapt.task)},
          {"adapt_both", adapt.adapt_both},
          {"dev_k", adapt.dev_k}}},
        {"eval", {{"ks", ks}, {"bleu_smoothing", eval.bleu_smoothing == eval::BleuSmoothing::none ? "none" : "add_one"}}},
        {"analysis",
         {{"domain_alpha", analysis.domain_alpha},
          {"domain_l2", analysis.domain_l2},
          {"holdout_fraction", analysis.holdout_fraction},
          {"domain_labels", analysis.domain_labels ? json(*analysis.domain_labels) : json(nullptr)}}},
        {"plugin",
         {{"handshake_timeout_ms", plugin.handshake_timeout_ms}, {"request_timeout_ms", plugin.request_timeout_ms}}},
    };
}

void RunConfig::validate() const
{
    try {
        decode.validate();
    } catch (const std::exception& e) {
        throw ConfigError(fmt::format("config field \"decode\": {}", e.what()));
    }
    try {
        filter.validate();
    } catch (const std::exception& e) {
        throw ConfigError(fmt::format("config field \"filter\": {}", e.what()));
    }
    if (negatives_k < 1 || max_iters < 1 || encoder_dim < 1 || train.epochs < 1 || train.batch < 1) {
        throw ConfigError("config counts must be >= 1");
    }
}

models::PluginOptions plugin_options(const RunConfig& config)
{
    models::PluginOptions o;
    o.handshake_timeout = std::chrono::milliseconds(config.plugin.handshake_timeout_ms);
    o.request_timeout = std::chrono::milliseconds(config.plugin.request_timeout_ms);
    return o;
}

std::unique_ptr<models::GeneratorModel> make_generator(const RunConfig& config)
{
    if (config.models.generator == "native") {
        models::NgramCopyConfig g;
        g.copy_weight = config.generator.copy_weight;
        g.smoothing = config.generator.smoothing;
        return std::make_unique<models::NgramCopyGenerator>(g);
    }
    return models::attach_generator(config.models.generator.substr(7), plugin_options(config));
}

std::unique_ptr<models::RetrieverModel> make_retriever(const RunConfig& config)
{
    if (config.models.retriever == "native-dual") {
        models::DualEncoderConfig d;
        d.dim = config.encoder_dim;
        d.epochs = config.train.epochs;
        d.batch = config.train.batch;
        d.lr = config.train.lr;
        d.lr_scale = config.train.lr_scale;
        d.seed = config.seed;
        return std::make_unique<models::DualEncoder>(d);
    }
    if (config.models.retriever == "native-bm25") {
        return std::make_unique<models::Bm25Retriever>();
    }
    return models::attach_retriever(config.models.retriever.substr(7), plugin_options(config));
}

augment::AdaptConfig adapt_config(const RunConfig& config, unsigned threads)
{
    augment::AdaptConfig a;
    a.mode = config.adapt.mode;
    a.task = config.adapt.task;
    a.adapt_both = config.adapt.adapt_both;
    a.filter = config.filter;
    a.max_iters = config.max_iters;
    a.decode = config.decode;
    a.negatives_k = config.negatives_k;
    a.dev_k = config.adapt.dev_k;
    a.threads = threads;
    return a;
}

}  // namespace dualtrain::config
