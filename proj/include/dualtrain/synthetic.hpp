// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dualtrain/corpus.hpp"
#include "dualtrain/models.hpp"

namespace dualtrain::augment {

enum class Task { qg, ir };
enum class Direction { self, back };

std::string_view to_string(Task task);
std::string_view to_string(Direction direction);
Task parse_task(std::string_view text);
Direction parse_direction(std::string_view text);

/// One synthetic training pair. For Task::qg the input is a passage and the
/// output a question; for Task::ir the input is a question and the output a
/// passage. Back-training outputs and self-training inputs are verbatim
/// target-corpus texts.
struct SyntheticExample {
    std::string input_text;
    std::string output_text;
    Task task = Task::qg;
    Direction direction = Direction::self;
    std::optional<std::string> source_passage_id;
    std::optional<std::string> source_question_id;
    std::optional<double> gen_loglik;
    std::optional<double> ret_sim;
    bool kept = true;

    /// Passage and question text of the pair regardless of task.
    const std::string& passage() const { return task == Task::qg ? input_text : output_text; }
    const std::string& question() const { return task == Task::qg ? output_text : input_text; }

    friend bool operator==(const SyntheticExample&, const SyntheticExample&) = default;
};

nlohmann::json to_json(const SyntheticExample& example);
SyntheticExample synthetic_from_json(const nlohmann::json& j);

/// Builds one synthetic set:
///   (self, qg)  p_u -> generated q        (back, qg)  retrieved p -> q_u
///   (self, ir)  q_u -> retrieved p        (back, ir)  generated q -> p_u
/// `retriever` must be indexed over `passages`; retrieval is top-1. Item i
/// decodes with derive_seed(decode.seed, i). gen_loglik and ret_sim are
/// filled whenever the model can score. Items whose generation or retrieval
/// fails are logged and skipped; the rest keep corpus order.
std::vector<SyntheticExample> build_synthetic(Direction direction, Task task,
                                              const models::GeneratorModel& generator,
                                              const models::RetrieverModel& retriever,
                                              std::span<const corpus::Passage> passages,
                                              std::span<const corpus::Question> questions,
                                              const models::DecodeConfig& decode, unsigned threads = 0);

/// JSON Lines, one example per line in the given order, filtered items included.
void export_synthetic(std::span<const SyntheticExample> examples, const std::filesystem::path& path);
std::vector<SyntheticExample> import_synthetic(const std::filesystem::path& path);

/// Generator training pairs from the kept examples.
std::vector<models::QgPair> kept_qg_pairs(std::span<const SyntheticExample> examples);

}  // namespace dualtrain::augment
