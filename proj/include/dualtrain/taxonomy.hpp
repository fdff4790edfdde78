// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dualtrain::analysis {

/// Declaration order is the D, C, E, M, P order of confusion-matrix axes.
enum class QuestionClass { description, comparison, explanation, method, preference };

inline constexpr std::size_t question_class_count = 5;

/// Single-letter label: D, C, E, M or P.
char abbreviation(QuestionClass c);
std::string_view to_string(QuestionClass c);

struct TaxonomyRules {
    /// First tokens that mark a Preference question.
    std::vector<std::string> preference_words = {"is", "are", "do", "does", "can", "should"};
};

/// First matching rule wins, on the tokenized text:
///   1. Comparison   contains "difference between", the token "vs", or starts with "compare"
///   2. Explanation  first token "why"
///   3. Method       first token "how"
///   4. Preference   first token in rules.preference_words
///   5. Description  everything else, including empty text
QuestionClass classify_question(std::string_view text, const TaxonomyRules& rules = {});

/// Gold class by row, generated class by column.
struct ConfusionMatrix {
    std::array<std::array<std::size_t, question_class_count>, question_class_count> counts{};

    std::size_t row_total(QuestionClass gold) const;
    /// Row percentages summing to 100, or all zero for a row with no support.
    std::array<double, question_class_count> row_percent(QuestionClass gold) const;
    /// Row-normalized percentages with a D,C,E,M,P header row and label
    /// column. Rows without support are left empty.
    std::string to_csv() const;
};

/// Throws std::invalid_argument when the lists differ in length.
ConfusionMatrix taxonomy_confusion(std::span<const std::string> gold, std::span<const std::string> generated,
                                   const TaxonomyRules& rules = {});

}  // namespace dualtrain::analysis
