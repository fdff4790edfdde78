// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dualtrain/rng.hpp"

namespace dualtrain::corpus {

/// Lowercases ASCII letters, splits on Unicode whitespace and strips leading
/// and trailing ASCII punctuation from each token. Interior punctuation
/// ("state-of-the-art", "don't") is kept and empty tokens are dropped.
std::vector<std::string> tokenize(std::string_view text);

/// Joins tokens with single spaces.
std::string join(const std::vector<std::string>& tokens);

struct Passage {
    std::string id;
    std::string text;
    std::size_t token_count = 0;

    friend bool operator==(const Passage&, const Passage&) = default;
};

struct Question {
    std::string id;
    std::string text;
    std::size_t token_count = 0;

    friend bool operator==(const Question&, const Question&) = default;
};

/// Builds a passage with its derived token count. Throws on blank text.
Passage make_passage(std::string id, std::string text);
Question make_question(std::string id, std::string text);

enum class Split { source_train, target_dev, target_test };

std::string_view to_string(Split split);

struct AlignedPair {
    Question question;
    Passage passage;
    Split split = Split::source_train;

    friend bool operator==(const AlignedPair&, const AlignedPair&) = default;
};

/// Everything the adaptation pipeline reads. Immutable after load.
struct CorpusBundle {
    std::vector<AlignedPair> source_pairs;
    std::vector<Passage> target_passages;
    std::vector<Question> target_questions;
    std::vector<AlignedPair> dev_pairs;
    std::vector<AlignedPair> test_pairs;
    std::vector<Passage> candidate_passages;

    friend bool operator==(const CorpusBundle&, const CorpusBundle&) = default;
};

/// Raised for malformed or inconsistent corpus input. `file` and `line`
/// (1-based) point at the offending record when known.
class CorpusError : public std::runtime_error {
public:
    CorpusError(const std::string& what, std::string file = {}, std::size_t line = 0);

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// Paths of the JSON Lines files that make up a corpus. Relative paths are
/// resolved against the directory passed to load_corpus.
struct Manifest {
    std::string source_pairs;
    std::string target_passages;
    std::string target_questions;
    std::string dev_pairs;
    std::string test_pairs;
    std::string candidate_passages;  // empty: union of P_U and dev/test gold

    static Manifest from_json(const nlohmann::json& j);
    static Manifest read(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

/// Loads and validates a bundle. Records without an "id" get "<file>:<line>",
/// where <file> is the path as written in the manifest.
CorpusBundle load_corpus(const std::filesystem::path& root, const Manifest& manifest);

/// Non-fatal findings about a loaded bundle.
struct ValidationReport {
    std::size_t source_pairs = 0;
    std::size_t target_passages = 0;
    std::size_t target_questions = 0;
    std::size_t dev_pairs = 0;
    std::size_t test_pairs = 0;
    std::size_t candidate_passages = 0;
    /// dev/test gold passages whose text also occurs in P_U. Permitted.
    std::size_t dev_test_passages_in_target_pool = 0;
    std::vector<std::string> errors;

    bool ok() const noexcept { return errors.empty(); }
    nlohmann::json to_json() const;
};

/// Checks the bundle invariants: unique ids, disjoint dev/test pair ids and
/// dev/test gold passages present in the candidate pool.
ValidationReport validate(const CorpusBundle& bundle);

/// Writes the bundle as JSON Lines with explicit ids plus a manifest.json.
/// Output is byte-for-byte a function of the bundle.
void write_bundle(const CorpusBundle& bundle, const std::filesystem::path& dir);

/// Uniform sample of n items without replacement using a partial
/// Fisher-Yates shuffle driven by SplitMix64(seed).
template <typename T>
std::vector<T> sample(const std::vector<T>& items, std::size_t n, std::uint64_t seed)
{
    if (n > items.size()) {
        throw std::invalid_argument("sample: n exceeds population size");
    }
    std::vector<std::size_t> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    Rng rng(seed);
    std::vector<T> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
        std::swap(order[i], order[j]);
        out.push_back(items[order[i]]);
    }
    return out;
}

}  // namespace dualtrain::corpus
