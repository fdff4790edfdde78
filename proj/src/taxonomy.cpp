// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/taxonomy.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "dualtrain/corpus.hpp"

namespace dualtrain::analysis {

char abbreviation(QuestionClass c)
{
    static constexpr std::array<char, question_class_count> letters = {'D', 'C', 'E', 'M', 'P'};
    return letters[static_cast<std::size_t>(c)];
}

std::string_view to_string(QuestionClass c)
{
    static constexpr std::array<std::string_view, question_class_count> names = {
        "Description", "Comparison", "Explanation", "Method", "Preference"};
    return names[static_cast<std::size_t>(c)];
}

QuestionClass classify_question(std::string_view text, const TaxonomyRules& rules)
{
    const auto tokens = corpus::tokenize(text);
    if (tokens.empty()) {
        return QuestionClass::description;
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == "vs") {
            return QuestionClass::comparison;
        }
        if (tokens[i] == "difference" && i + 1 < tokens.size() && tokens[i + 1] == "between") {
            return QuestionClass::comparison;
        }
    }
    const std::string& first = tokens.front();
    if (first == "compare") {
        return QuestionClass::comparison;
    }
    if (first == "why") {
        return QuestionClass::explanation;
    }
    if (first == "how") {
        return QuestionClass::method;
    }
    if (std::find(rules.preference_words.begin(), rules.preference_words.end(), first) !=
        rules.preference_words.end()) {
        return QuestionClass::preference;
    }
    return QuestionClass::description;
}

std::size_t ConfusionMatrix::row_total(QuestionClass gold) const
{
    const auto& row = counts[static_cast<std::size_t>(gold)];
    std::size_t total = 0;
    for (const auto c : row) {
        total += c;
    }
    return total;
}

std::array<double, question_class_count> ConfusionMatrix::row_percent(QuestionClass gold) const
{
    std::array<double, question_class_count> out{};
    const std::size_t total = row_total(gold);
    if (total == 0) {
        return out;
    }
    const auto& row = counts[static_cast<std::size_t>(gold)];
    for (std::size_t j = 0; j < question_class_count; ++j) {
        out[j] = 100.0 * static_cast<double>(row[j]) / static_cast<double>(total);
    }
    return out;
}

std::string ConfusionMatrix::to_csv() const
{
    std::string out = "gold";
    for (std::size_t j = 0; j < question_class_count; ++j) {
        out += ',';
        out += abbreviation(static_cast<QuestionClass>(j));
    }
    out += '\n';
    for (std::size_t i = 0; i < question_class_count; ++i) {
        const auto gold = static_cast<QuestionClass>(i);
        out += abbreviation(gold);
        const bool supported = row_total(gold) > 0;
        const auto pct = row_percent(gold);
        for (std::size_t j = 0; j < question_class_count; ++j) {
            out += ',';
            if (supported) {
                out += fmt::format("{:.2f}", pct[j]);
            }
        }
        out += '\n';
    }
    return out;
}

ConfusionMatrix taxonomy_confusion(std::span<const std::string> gold, std::span<const std::string> generated,
                                   const TaxonomyRules& rules)
{
    if (gold.size() != generated.size()) {
        throw std::invalid_argument(
            fmt::format("taxonomy_confusion: {} gold vs {} generated questions", gold.size(), generated.size()));
    }
    ConfusionMatrix m;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const auto g = static_cast<std::size_t>(classify_question(gold[i], rules));
        const auto h = static_cast<std::size_t>(classify_question(generated[i], rules));
        ++m.counts[g][h];
    }
    return m;
}

}  // namespace dualtrain::analysis
