// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dualtrain/adapt.hpp"
#include "dualtrain/analysis.hpp"
#include "dualtrain/config.hpp"
#include "dualtrain/corpus.hpp"
#include "dualtrain/domain_filter.hpp"
#include "dualtrain/evaluation.hpp"
#include "dualtrain/filters.hpp"
#include "dualtrain/parallel.hpp"
#include "dualtrain/rng.hpp"
#include "dualtrain/synthetic.hpp"
#include "dualtrain/taxonomy.hpp"
#include "jsonl.hpp"

namespace dualtrain::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Bad invocation: missing or contradictory flags, protected output directory.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string subcommand;
    std::string config_path;
    std::string out;
    std::string corpus;
    std::string models;
    std::string split = "test";
    std::string mode;
    std::string task;
    std::string filter;
    std::vector<std::string> inputs;
    std::uint64_t seed = 0;
    double accept_fraction = 0.0;
    std::size_t iters = 0;
    unsigned threads = 0;
    bool force = false;

    bool seed_set = false;
    bool accept_fraction_set = false;
    bool iters_set = false;
};

void configure_logging()
{
    static const bool once = [] {
        auto logger = spdlog::stderr_color_mt("dualtrain");
        spdlog::set_default_logger(logger);
        return true;
    }();
    (void)once;
    spdlog::level::level_enum level = spdlog::level::info;
    if (const char* env = std::getenv("DUALTRAIN_LOG")) {
        const std::string v = env;
        if (v == "error") {
            level = spdlog::level::err;
        } else if (v == "warn") {
            level = spdlog::level::warn;
        } else if (v == "debug") {
            level = spdlog::level::debug;
        } else if (v != "info") {
            spdlog::warn("DUALTRAIN_LOG=\"{}\" is not one of error, info, debug; using info", v);
        }
    }
    spdlog::set_level(level);
}

// ---- shared plumbing -------------------------------------------------------

class Run {
public:
    explicit Run(Options options) : opt_(std::move(options)), started_(std::chrono::steady_clock::now()) {}

    const Options& opt() const { return opt_; }
    const config::RunConfig& cfg() const { return cfg_; }
    unsigned threads() const { return opt_.threads; }

    void load_config()
    {
        cfg_ = opt_.config_path.empty() ? config::RunConfig::from_json(json::object())
                                        : config::RunConfig::read(opt_.config_path);
        if (opt_.seed_set) {
            cfg_.seed = opt_.seed;
            if (!cfg_.decode_seed_explicit) {
                cfg_.decode.seed = opt_.seed;
            }
        }
        if (!opt_.mode.empty()) {
            cfg_.adapt.mode = augment::parse_direction(opt_.mode);
        }
        if (!opt_.task.empty() && opt_.subcommand != "filter") {
            cfg_.adapt.task = augment::parse_adapt_task(opt_.task);
        }
        if (!opt_.filter.empty()) {
            cfg_.filter.kind = filters::parse_filter_kind(opt_.filter);
        }
        if (opt_.accept_fraction_set) {
            cfg_.filter.accept_fraction = opt_.accept_fraction;
        }
        if (opt_.iters_set) {
            if (opt_.iters < 1) {
                throw config::ConfigError("--iters must be >= 1");
            }
            cfg_.max_iters = opt_.iters;
        }
        if (!opt_.corpus.empty()) {
            cfg_.corpus = opt_.corpus;
        }
        try {
            cfg_.validate();
        } catch (const std::invalid_argument& e) {
            throw config::ConfigError(e.what());
        }
    }

    /// Creates --out when given. An existing nonempty directory is refused
    /// without --force.
    void open_out()
    {
        if (opt_.out.empty()) {
            return;
        }
        const fs::path out = opt_.out;
        if (fs::exists(out)) {
            if (!fs::is_directory(out)) {
                throw UsageError(fmt::format("output path {} is not a directory", out.string()));
            }
            if (!fs::is_empty(out) && !opt_.force) {
                throw UsageError(
                    fmt::format("output directory {} already exists; pass --force to reuse it", out.string()));
            }
        }
        fs::create_directories(out);
        out_ = out;
    }

    void require_out() const
    {
        if (!out_) {
            throw UsageError(fmt::format("{} requires --out DIR", opt_.subcommand));
        }
    }

    bool has_out() const { return out_.has_value(); }
    fs::path out(const std::string& name) const { return *out_ / name; }

    corpus::CorpusBundle load_bundle() const
    {
        if (!cfg_.corpus) {
            throw UsageError("no corpus given: pass --corpus MANIFEST or set \"corpus\" in the config");
        }
        const fs::path manifest_path = *cfg_.corpus;
        const auto manifest = corpus::Manifest::read(manifest_path);
        return corpus::load_corpus(manifest_path.parent_path(), manifest);
    }

    struct Models {
        std::unique_ptr<models::GeneratorModel> generator;
        std::unique_ptr<models::RetrieverModel> retriever;
    };

    /// Checkpoints from --models, or baseline models trained on the source pairs.
    Models models(const corpus::CorpusBundle* bundle) const
    {
        if (!opt_.models.empty()) {
            const fs::path dir = opt_.models;
            return {models::load_generator(dir / "generator.ckpt"), models::load_retriever(dir / "retriever.ckpt")};
        }
        if (bundle == nullptr) {
            throw UsageError(fmt::format("{} needs --models DIR or a corpus to train baseline models", opt_.subcommand));
        }
        return train_baseline(*bundle);
    }

    Models train_baseline(const corpus::CorpusBundle& bundle) const
    {
        if (bundle.source_pairs.empty()) {
            throw eval::EmptySplitError("split source_train is empty; baseline models cannot be trained");
        }
        Models m{config::make_generator(cfg_), config::make_retriever(cfg_)};
        std::vector<models::QgPair> qg;
        for (const auto& p : bundle.source_pairs) {
            qg.push_back({p.passage.text, p.question.text});
        }
        spdlog::info("training baseline generator \"{}\" on {} source pairs", m.generator->name(), qg.size());
        m.generator->train(qg);
        if (m.retriever->trainable()) {
            const auto pool = augment::unique_passages(bundle.source_pairs);
            const auto examples = augment::mined_retrieval_examples(bundle.source_pairs, pool, cfg_.negatives_k);
            spdlog::info("training baseline retriever \"{}\" on {} source pairs", m.retriever->name(), examples.size());
            m.retriever->train(examples);
        }
        return m;
    }

    eval::EvalOptions eval_options() const
    {
        eval::EvalOptions o;
        o.decode = cfg_.decode;
        o.ks = cfg_.eval.ks;
        o.smoothing = cfg_.eval.bleu_smoothing;
        o.threads = opt_.threads;
        return o;
    }

    void write_json(const std::string& name, const json& doc) const { detail::write_json(out(name), doc); }

    void write_text(const std::string& name, const std::string& text) const
    {
        std::ofstream f(out(name), std::ios::binary | std::ios::trunc);
        f << text;
        if (!f) {
            throw std::runtime_error("write failed for " + out(name).string());
        }
    }

    /// run_meta.json: effective config, seed, versions, wall time and outcome.
    void write_meta(const std::vector<std::string>& args, int status, const std::string& error) const
    {
        if (!out_) {
            return;
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
        json meta = {
            {"subcommand", opt_.subcommand},
            {"args", args},
            {"config", cfg_.to_json()},
            {"seed", cfg_.seed},
            {"threads", resolve_threads(opt_.threads)},
            {"versions",
             {{"dualtrain", DUALTRAIN_VERSION},
              {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                            NLOHMANN_JSON_VERSION_PATCH)},
              {"spdlog", fmt::format("{}.{}.{}", SPDLOG_VER_MAJOR, SPDLOG_VER_MINOR, SPDLOG_VER_PATCH)},
              {"fmt", FMT_VERSION},
              {"cli11", CLI11_VERSION}}},
            {"wall_seconds", wall},
            {"exit_status", status},
        };
        if (!error.empty()) {
            meta["error"] = error;
        }
        try {
            detail::write_json(out("run_meta.json"), meta);
        } catch (const std::exception& e) {
            spdlog::error("cannot write run_meta.json: {}", e.what());
        }
    }

private:
    Options opt_;
    config::RunConfig cfg_;
    std::optional<fs::path> out_;
    std::chrono::steady_clock::time_point started_;
};

void save_models(const Run& run, const models::GeneratorModel& generator, const models::RetrieverModel& retriever)
{
    generator.save(run.out("generator.ckpt"));
    retriever.save(run.out("retriever.ckpt"));
}

// ---- subcommands -------------------------------------------------------------

int cmd_ingest(Run& run)
{
    run.require_out();
    const auto bundle = run.load_bundle();
    corpus::write_bundle(bundle, run.out("corpus"));
    const auto report = corpus::validate(bundle);
    run.write_json("validation.json", report.to_json());
    spdlog::info("ingested {} source pairs, {} target passages, {} target questions", bundle.source_pairs.size(),
                 bundle.target_passages.size(), bundle.target_questions.size());
    return report.ok() ? exit_ok : exit_invalid;
}

int cmd_validate(Run& run)
{
    corpus::ValidationReport report;
    try {
        report = corpus::validate(run.load_bundle());
    } catch (const corpus::CorpusError& e) {
        report.errors.push_back(e.what());
    }
    const auto doc = report.to_json();
    std::cout << doc.dump(2) << '\n';
    if (run.has_out()) {
        run.write_json("validation.json", doc);
    }
    return report.ok() ? exit_ok : exit_invalid;
}

int cmd_train_baseline(Run& run)
{
    run.require_out();
    const auto bundle = run.load_bundle();
    const auto m = run.train_baseline(bundle);
    save_models(run, *m.generator, *m.retriever);
    return exit_ok;
}

int cmd_adapt(Run& run)
{
    run.require_out();
    const auto bundle = run.load_bundle();
    if (bundle.test_pairs.empty()) {
        throw eval::EmptySplitError("evaluation split target_test is empty");
    }
    const auto m = run.models(&bundle);
    const auto result = augment::adapt(config::adapt_config(run.cfg(), run.threads()), bundle, *m.generator,
                                       *m.retriever);
    augment::export_synthetic(result.synthetic, run.out("synthetic.jsonl"));
    run.write_json("history.json", result.history.to_json());
    run.write_text("trajectory_qg.csv", result.qg_trajectory.to_csv());
    run.write_text("trajectory_ir.csv", result.ir_trajectory.to_csv());
    save_models(run, *result.generator, *result.retriever);
    const auto report =
        eval::evaluate(*result.generator, *result.retriever, bundle, corpus::Split::target_test, run.eval_options());
    run.write_json("report.json", report.to_json());
    run.write_text("report.csv", report.to_csv());
    spdlog::info("best iteration {} (net gain {:.4f})", result.history.best_t, result.history.net_gain);
    return exit_ok;
}

int cmd_filter(Run& run)
{
    if (run.opt().inputs.size() != 1) {
        throw UsageError("filter requires exactly one --input synthetic.jsonl");
    }
    run.require_out();
    auto examples = augment::import_synthetic(run.opt().inputs.front());
    if (examples.empty()) {
        throw UsageError("filter input holds no examples");
    }
    const bool has_qg = std::any_of(examples.begin(), examples.end(), [](const auto& e) { return e.task == augment::Task::qg; });
    const bool has_ir = std::any_of(examples.begin(), examples.end(), [](const auto& e) { return e.task == augment::Task::ir; });
    augment::Task task = has_qg ? augment::Task::qg : augment::Task::ir;
    if (!run.opt().task.empty()) {
        task = augment::parse_task(run.opt().task);
    } else if (has_qg && has_ir) {
        throw UsageError("input holds qg and ir examples; pass --task qg or --task ir");
    }

    std::vector<std::size_t> positions;
    std::vector<augment::SyntheticExample> selected;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (examples[i].task == task) {
            positions.push_back(i);
            selected.push_back(examples[i]);
        }
    }
    if (selected.empty()) {
        throw UsageError(fmt::format("input holds no {} examples", augment::to_string(task)));
    }

    const auto& policy = run.cfg().filter;
    std::optional<corpus::CorpusBundle> bundle;
    if (run.opt().models.empty()) {
        bundle = run.load_bundle();
    }
    const auto m = run.models(bundle ? &*bundle : nullptr);
    if (policy.kind != filters::FilterKind::none) {
        const auto critic = filters::critic_for(policy.kind, task);
        if (critic == filters::Critic::generator) {
            filters::score_with_critic(*m.generator, selected, run.threads());
        } else {
            if (!m.retriever->indexed()) {
                std::vector<corpus::Passage> pool;
                for (std::size_t i = 0; i < selected.size(); ++i) {
                    pool.push_back(corpus::make_passage(fmt::format("input:{}", i), selected[i].passage()));
                }
                m.retriever->index(pool);
            }
            filters::score_with_critic(*m.retriever, selected, run.threads());
        }
    }
    std::span<augment::SyntheticExample> none;
    const auto result = task == augment::Task::qg
                            ? filters::apply_filter(policy, selected, none, *m.generator, *m.retriever, run.threads())
                            : filters::apply_filter(policy, none, selected, *m.generator, *m.retriever, run.threads());
    const auto& report = task == augment::Task::qg ? result.generator_set : result.retriever_set;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        examples[positions[i]] = selected[i];
    }
    augment::export_synthetic(examples, run.out("synthetic.jsonl"));
    run.write_json("filter_report.json", report->to_json());
    spdlog::info("kept {} of {} {} examples", report->n_kept, report->n_in, augment::to_string(task));
    return exit_ok;
}

corpus::Split parse_split(const std::string& text)
{
    if (text == "test") {
        return corpus::Split::target_test;
    }
    if (text == "dev") {
        return corpus::Split::target_dev;
    }
    throw UsageError(fmt::format("unknown split \"{}\" (expected dev or test)", text));
}

int cmd_eval(Run& run)
{
    const auto split = parse_split(run.opt().split);
    run.require_out();
    const auto bundle = run.load_bundle();
    const auto& pairs = split == corpus::Split::target_test ? bundle.test_pairs : bundle.dev_pairs;
    if (pairs.empty()) {
        throw eval::EmptySplitError(fmt::format("evaluation split {} is empty", corpus::to_string(split)));
    }
    const auto m = run.models(&bundle);
    const auto report = eval::evaluate(*m.generator, *m.retriever, bundle, split, run.eval_options());
    run.write_json("report.json", report.to_json());
    run.write_text("report.csv", report.to_csv());
    return exit_ok;
}

std::vector<double> field_scores(const std::vector<augment::SyntheticExample>& set, filters::Critic critic)
{
    return filters::critic_scores(set, critic);
}

std::vector<analysis::LabeledQuestion> domain_labels(const Run& run, const corpus::CorpusBundle& bundle)
{
    std::vector<analysis::LabeledQuestion> labeled;
    if (const auto& path = run.cfg().analysis.domain_labels) {
        detail::for_each_jsonl(*path, fs::path(*path).filename().string(), [&](const json& j, std::size_t line) {
            const auto label = j.at("label").get<std::string>();
            if (label != "in_domain" && label != "ood") {
                throw corpus::CorpusError("label must be \"in_domain\" or \"ood\"", *path, line);
            }
            labeled.push_back({corpus::make_question(fmt::format("label:{}", line), j.at("text").get<std::string>()),
                               label == "in_domain" ? analysis::DomainLabel::in_domain : analysis::DomainLabel::ood});
        });
        return labeled;
    }
    for (const auto& q : bundle.target_questions) {
        labeled.push_back({q, analysis::DomainLabel::in_domain});
    }
    for (const auto& p : bundle.source_pairs) {
        labeled.push_back({p.question, analysis::DomainLabel::ood});
    }
    return labeled;
}

int cmd_analyze(Run& run)
{
    run.require_out();
    const auto bundle = run.load_bundle();
    auto m = run.models(&bundle);
    const auto& cfg = run.cfg();

    // Confidence distributions: each task model scoring self- and back-training data.
    m.retriever->index(bundle.target_passages);
    json distributions = json::object();
    using augment::Direction;
    using augment::Task;
    auto build = [&](Direction d, Task t) {
        return augment::build_synthetic(d, t, *m.generator, *m.retriever, bundle.target_passages,
                                        bundle.target_questions, cfg.decode, run.threads());
    };
    if (m.generator->can_score()) {
        const auto self = build(Direction::self, Task::qg);
        const auto back = build(Direction::back, Task::qg);
        distributions["qg"] = analysis::compare_self_vs_back(field_scores(self, filters::Critic::generator),
                                                             field_scores(back, filters::Critic::generator))
                                  .to_json();
    } else {
        distributions["qg"] = nullptr;
    }
    if (m.retriever->can_score()) {
        const auto self = build(Direction::self, Task::ir);
        const auto back = build(Direction::back, Task::ir);
        distributions["ir"] = analysis::compare_self_vs_back(field_scores(self, filters::Critic::retriever),
                                                             field_scores(back, filters::Critic::retriever))
                                  .to_json();
    } else {
        distributions["ir"] = nullptr;
    }
    run.write_json("distributions.json", distributions);

    // Training trajectories of the selected adaptation run.
    const auto adapted = augment::adapt(config::adapt_config(cfg, run.threads()), bundle, *m.generator, *m.retriever);
    const bool ir_only = cfg.adapt.task == augment::AdaptTask::ir;
    run.write_text("trajectory.csv", ir_only ? adapted.ir_trajectory.to_csv() : adapted.qg_trajectory.to_csv());
    if (cfg.adapt.task == augment::AdaptTask::both) {
        run.write_text("trajectory_ir.csv", adapted.ir_trajectory.to_csv());
    }

    // Question taxonomy of generated versus gold test questions.
    const auto& pairs = bundle.test_pairs.empty() ? bundle.dev_pairs : bundle.test_pairs;
    if (pairs.empty()) {
        spdlog::warn("no dev or test pairs; confusion.csv skipped");
    } else {
        std::vector<std::string> passages;
        std::vector<std::string> gold;
        for (const auto& p : pairs) {
            passages.push_back(p.passage.text);
            gold.push_back(p.question.text);
        }
        const auto generated = eval::generate_questions(*adapted.generator, passages, cfg.decode, run.threads());
        run.write_text("confusion.csv", analysis::taxonomy_confusion(gold, generated).to_csv());
    }

    // In-domain question filter with a held-out precision/recall curve.
    auto labeled = domain_labels(run, bundle);
    std::vector<std::size_t> order(labeled.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    Rng rng(derive_seed(cfg.seed, 0xD0));
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    const auto holdout = static_cast<std::size_t>(cfg.analysis.holdout_fraction * static_cast<double>(labeled.size()));
    std::vector<analysis::LabeledQuestion> train;
    std::vector<corpus::Question> test_questions;
    std::vector<analysis::DomainLabel> test_labels;
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto& l = labeled[order[r]];
        if (r < holdout) {
            test_questions.push_back(l.question);
            test_labels.push_back(l.label);
        } else {
            train.push_back(l);
        }
    }
    analysis::DomainFilterConfig dcfg;
    dcfg.l2 = cfg.analysis.domain_l2;
    dcfg.seed = cfg.seed;
    dcfg.alpha = cfg.analysis.domain_alpha;
    const auto model = analysis::train_domain_filter(train, dcfg);
    const auto filtered = analysis::apply_domain_filter(model, test_questions, dcfg.alpha, test_labels);
    run.write_text("pr_curve.csv", analysis::pr_curve_csv(filtered.pr_curve));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test_questions.size(); ++i) {
        const bool predicted_in = model.probability(test_questions[i].text) >= 0.5;
        correct += predicted_in == (test_labels[i] == analysis::DomainLabel::in_domain) ? 1 : 0;
    }
    run.write_json("domain_filter.json",
                   {{"feature_extractor", model.feature_id},
                    {"alpha", dcfg.alpha},
                    {"n_train", train.size()},
                    {"n_holdout", test_questions.size()},
                    {"holdout_accuracy", test_questions.empty() ? 0.0
                                                                : static_cast<double>(correct) /
                                                                      static_cast<double>(test_questions.size())},
                    {"accepted", filtered.accepted.size()},
                    {"rejected", filtered.rejected.size()}});
    return exit_ok;
}

json read_json_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError(fmt::format("{}: malformed JSON at byte {}", path.string(), e.byte));
    }
}

int cmd_report(Run& run)
{
    if (run.opt().inputs.empty()) {
        throw UsageError("report requires at least one --input RUN_DIR");
    }
    run.require_out();
    json rows = json::array();
    std::string header;
    std::string csv;
    for (const auto& input : run.opt().inputs) {
        const fs::path dir = input;
        const auto report = eval::EvalReport::from_json(read_json_file(dir / "report.json"));
        json row = {{"run", dir.filename().string()}, {"report", report.to_json()}};
        std::string mode;
        std::string task;
        if (fs::exists(dir / "run_meta.json")) {
            const auto meta = read_json_file(dir / "run_meta.json");
            if (meta.contains("config") && meta["config"].contains("adapt")) {
                mode = meta["config"]["adapt"].value("mode", "");
                task = meta["config"]["adapt"].value("task", "");
            }
            row["subcommand"] = meta.value("subcommand", "");
        }
        row["mode"] = mode;
        row["task"] = task;
        std::string best_t;
        std::string net_gain;
        if (fs::exists(dir / "history.json")) {
            const auto history = read_json_file(dir / "history.json");
            row["best_t"] = history.at("best_t");
            row["net_gain"] = history.at("net_gain");
            best_t = history.at("best_t").dump();
            net_gain = fmt::format("{:.4f}", history.at("net_gain").get<double>());
        }
        const auto lines = report.to_csv();
        const auto split = lines.find('\n');
        const std::string metrics_header = lines.substr(0, split);
        const std::string metrics_row = lines.substr(split + 1, lines.size() - split - 2);
        const std::string this_header = "run,mode,task," + metrics_header + ",best_t,net_gain";
        if (header.empty()) {
            header = this_header;
        } else if (header != this_header) {
            throw UsageError(fmt::format("{} reports different metrics than the first run", dir.string()));
        }
        csv += fmt::format("{},{},{},{},{},{}\n", dir.filename().string(), mode, task, metrics_row, best_t, net_gain);
        rows.push_back(std::move(row));
    }
    run.write_json("summary.json", rows);
    run.write_text("summary.csv", header + "\n" + csv);
    return exit_ok;
}

// ---- argument parsing --------------------------------------------------------

void add_common(CLI::App* sub, Options& o)
{
    sub->add_option("--config", o.config_path, "JSON run configuration");
    sub->add_option("--out", o.out, "output directory (write-once unless --force)");
    sub->add_option("--corpus", o.corpus, "corpus manifest.json");
    sub->add_option("--seed", o.seed, "run seed")->each([&o](const std::string&) { o.seed_set = true; });
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    sub->add_flag("--force", o.force, "reuse an existing output directory");
}

void add_models(CLI::App* sub, Options& o)
{
    sub->add_option("--models", o.models, "directory holding generator.ckpt and retriever.ckpt");
}

void add_adapt_flags(CLI::App* sub, Options& o)
{
    sub->add_option("--mode", o.mode, "self | back")->check(CLI::IsMember({"self", "back"}));
    sub->add_option("--task", o.task, "qg | ir | both")->check(CLI::IsMember({"qg", "ir", "both"}));
    sub->add_option("--iters", o.iters, "maximum adaptation iterations")->each([&o](const std::string&) {
        o.iters_set = true;
    });
}

void add_filter_flags(CLI::App* sub, Options& o)
{
    sub->add_option("--filter", o.filter, "none | self | cross")->check(CLI::IsMember({"none", "self", "cross"}));
    sub->add_option("--accept-fraction", o.accept_fraction, "fraction of synthetic data kept")
        ->each([&o](const std::string&) { o.accept_fraction_set = true; });
}

}  // namespace

int run(const std::vector<std::string>& args)
{
    configure_logging();
    Options o;
    CLI::App app{"Self- and back-training for question generation and passage retrieval", "dualtrain"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", DUALTRAIN_VERSION);

    auto* ingest = app.add_subcommand("ingest", "load, validate and normalize a corpus");
    add_common(ingest, o);
    auto* validate = app.add_subcommand("validate", "check a corpus without writing it");
    add_common(validate, o);
    auto* baseline = app.add_subcommand("train-baseline", "train source-domain baseline models");
    add_common(baseline, o);
    auto* adapt = app.add_subcommand("adapt", "iterative self- or back-training");
    add_common(adapt, o);
    add_models(adapt, o);
    add_adapt_flags(adapt, o);
    add_filter_flags(adapt, o);
    auto* filter = app.add_subcommand("filter", "consistency-filter a synthetic.jsonl");
    add_common(filter, o);
    add_models(filter, o);
    add_filter_flags(filter, o);
    filter->add_option("--input", o.inputs, "synthetic.jsonl to filter");
    filter->add_option("--task", o.task, "qg | ir")->check(CLI::IsMember({"qg", "ir"}));
    auto* evaluate = app.add_subcommand("eval", "QG metrics and top-k retrieval accuracy");
    add_common(evaluate, o);
    add_models(evaluate, o);
    evaluate->add_option("--split", o.split, "dev | test")->check(CLI::IsMember({"dev", "test"}));
    auto* analyze = app.add_subcommand("analyze", "score distributions, trajectories, taxonomy, domain filter");
    add_common(analyze, o);
    add_models(analyze, o);
    add_adapt_flags(analyze, o);
    add_filter_flags(analyze, o);
    auto* report = app.add_subcommand("report", "collect report.json files into one table");
    add_common(report, o);
    report->add_option("--input", o.inputs, "run directory (repeatable)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }
    o.subcommand = app.get_subcommands().front()->get_name();

    Run r(o);
    int status = exit_runtime;
    std::string error;
    try {
        r.open_out();
        r.load_config();
        if (o.subcommand == "ingest") {
            status = cmd_ingest(r);
        } else if (o.subcommand == "validate") {
            status = cmd_validate(r);
        } else if (o.subcommand == "train-baseline") {
            status = cmd_train_baseline(r);
        } else if (o.subcommand == "adapt") {
            status = cmd_adapt(r);
        } else if (o.subcommand == "filter") {
            status = cmd_filter(r);
        } else if (o.subcommand == "eval") {
            status = cmd_eval(r);
        } else if (o.subcommand == "analyze") {
            status = cmd_analyze(r);
        } else {
            status = cmd_report(r);
        }
    } catch (const UsageError& e) {
        status = exit_invalid;
        error = e.what();
    } catch (const config::ConfigError& e) {
        status = exit_invalid;
        error = e.what();
    } catch (const corpus::CorpusError& e) {
        status = exit_invalid;
        error = e.what();
    } catch (const eval::EmptySplitError& e) {
        status = exit_invalid;
        error = e.what();
    } catch (const std::invalid_argument& e) {
        status = exit_invalid;
        error = e.what();
    } catch (const std::exception& e) {
        status = exit_runtime;
        error = e.what();
    }
    if (!error.empty()) {
        std::cerr << "dualtrain " << o.subcommand << ": error: " << error << '\n';
    }
    r.write_meta(args, status, error);
    return status;
}

}  // namespace dualtrain::cli
