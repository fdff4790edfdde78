// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/synthetic.hpp"

#include <optional>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dualtrain/parallel.hpp"
#include "dualtrain/rng.hpp"
#include "jsonl.hpp"

namespace dualtrain::augment {

std::string_view to_string(Task task)
{
    return task == Task::qg ? "qg" : "ir";
}

std::string_view to_string(Direction direction)
{
    return direction == Direction::self ? "self" : "back";
}

Task parse_task(std::string_view text)
{
    if (text == "qg") {
        return Task::qg;
    }
    if (text == "ir") {
        return Task::ir;
    }
    throw std::invalid_argument(fmt::format("unknown task \"{}\" (expected qg or ir)", text));
}

Direction parse_direction(std::string_view text)
{
    if (text == "self") {
        return Direction::self;
    }
    if (text == "back") {
        return Direction::back;
    }
    throw std::invalid_argument(fmt::format("unknown direction \"{}\" (expected self or back)", text));
}

namespace {

template <typename T>
nlohmann::json optional_json(const std::optional<T>& value)
{
    return value ? nlohmann::json(*value) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> optional_field(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return j.at(key).get<T>();
}

}  // namespace

nlohmann::json to_json(const SyntheticExample& e)
{
    nlohmann::json j;
    j["task"] = to_string(e.task);
    j["direction"] = to_string(e.direction);
    j["input"] = e.input_text;
    j["output"] = e.output_text;
    j["src_passage_id"] = optional_json(e.source_passage_id);
    j["src_question_id"] = optional_json(e.source_question_id);
    j["gen_loglik"] = optional_json(e.gen_loglik);
    j["ret_sim"] = optional_json(e.ret_sim);
    j["kept"] = e.kept;
    return j;
}

SyntheticExample synthetic_from_json(const nlohmann::json& j)
{
    SyntheticExample e;
    e.task = parse_task(j.at("task").get<std::string>());
    e.direction = parse_direction(j.at("direction").get<std::string>());
    e.input_text = j.at("input").get<std::string>();
    e.output_text = j.at("output").get<std::string>();
    e.source_passage_id = optional_field<std::string>(j, "src_passage_id");
    e.source_question_id = optional_field<std::string>(j, "src_question_id");
    e.gen_loglik = optional_field<double>(j, "gen_loglik");
    e.ret_sim = optional_field<double>(j, "ret_sim");
    e.kept = j.value("kept", true);
    if (!e.source_passage_id && !e.source_question_id) {
        throw std::invalid_argument("synthetic example has no provenance id");
    }
    return e;
}

std::vector<SyntheticExample> build_synthetic(Direction direction, Task task,
                                              const models::GeneratorModel& generator,
                                              const models::RetrieverModel& retriever,
                                              std::span<const corpus::Passage> passages,
                                              std::span<const corpus::Question> questions,
                                              const models::DecodeConfig& decode, unsigned threads)
{
    decode.validate();
    // Generation runs over P_U for (self, qg) and (back, ir); retrieval over Q_U otherwise.
    const bool from_passages = (direction == Direction::self) == (task == Task::qg);
    if (!from_passages && !retriever.indexed()) {
        throw models::ModelError("retriever has no index over the target passages");
    }
    std::unordered_map<std::string_view, std::size_t> passage_by_id;
    for (std::size_t i = 0; i < passages.size(); ++i) {
        passage_by_id.emplace(passages[i].id, i);
    }

    auto fill_scores = [&](SyntheticExample& e) {
        if (generator.can_score()) {
            e.gen_loglik = generator.score(e.passage(), e.question());
        }
        if (retriever.can_score()) {
            e.ret_sim = retriever.score(e.question(), e.passage());
        }
    };

    const std::size_t n = from_passages ? passages.size() : questions.size();
    const auto built = parallel_map(n, threads, [&](std::size_t i) -> std::optional<SyntheticExample> {
        SyntheticExample e;
        e.task = task;
        e.direction = direction;
        try {
            if (from_passages) {
                const auto& p = passages[i];
                models::DecodeConfig item = decode;
                item.seed = derive_seed(decode.seed, i);
                std::string q = generator.generate(p.text, item).question;
                if (corpus::tokenize(q).empty()) {
                    throw models::ModelError("empty generation");
                }
                e.source_passage_id = p.id;
                e.input_text = task == Task::qg ? p.text : std::move(q);
                if (task == Task::qg) {
                    e.output_text = std::move(q);
                } else {
                    e.output_text = p.text;
                }
            } else {
                const auto& q = questions[i];
                const auto hits = retriever.retrieve(q.text, 1);
                if (hits.empty()) {
                    throw models::ModelError("retrieval returned no passage");
                }
                const auto found = passage_by_id.find(hits.front().id);
                if (found == passage_by_id.end()) {
                    throw models::ModelError(fmt::format("retrieved id \"{}\" is not a target passage", hits.front().id));
                }
                const auto& p = passages[found->second];
                e.source_question_id = q.id;
                e.source_passage_id = p.id;
                e.input_text = task == Task::qg ? p.text : q.text;
                e.output_text = task == Task::qg ? q.text : p.text;
            }
            fill_scores(e);
        } catch (const std::exception& ex) {
            spdlog::warn("synthetic ({}, {}) item {} skipped: {}", to_string(direction), to_string(task), i,
                         ex.what());
            return std::nullopt;
        }
        return e;
    });

    std::vector<SyntheticExample> out;
    out.reserve(n);
    for (const auto& e : built) {
        if (e) {
            out.push_back(*e);
        }
    }
    spdlog::debug("synthetic ({}, {}): {} of {} items", to_string(direction), to_string(task), out.size(), n);
    return out;
}

void export_synthetic(std::span<const SyntheticExample> examples, const std::filesystem::path& path)
{
    std::vector<nlohmann::json> rows;
    rows.reserve(examples.size());
    for (const auto& e : examples) {
        rows.push_back(to_json(e));
    }
    detail::write_jsonl(path, rows);
}

std::vector<SyntheticExample> import_synthetic(const std::filesystem::path& path)
{
    std::vector<SyntheticExample> out;
    detail::for_each_jsonl(path, path.filename().string(), [&](const nlohmann::json& j, std::size_t line) {
        try {
            out.push_back(synthetic_from_json(j));
        } catch (const std::exception& e) {
            throw corpus::CorpusError(e.what(), path.filename().string(), line);
        }
    });
    return out;
}

std::vector<models::QgPair> kept_qg_pairs(std::span<const SyntheticExample> examples)
{
    std::vector<models::QgPair> out;
    for (const auto& e : examples) {
        if (e.kept) {
            out.push_back({e.passage(), e.question()});
        }
    }
    return out;
}

}  // namespace dualtrain::augment
