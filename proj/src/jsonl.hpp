// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

// Internal JSON Lines helpers shared by the loaders and exporters.

#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualtrain/corpus.hpp"

namespace dualtrain::detail {

/// Calls fn(object, line_number) for each nonblank line of a JSON Lines file.
/// Errors carry `display_name` and the 1-based line number.
template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, const std::string& display_name, Fn&& fn)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw corpus::CorpusError("cannot open file " + path.string(), display_name);
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        nlohmann::json object;
        try {
            object = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw corpus::CorpusError(
                "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what(),
                display_name, line_no);
        }
        if (!object.is_object()) {
            throw corpus::CorpusError("expected a JSON object", display_name, line_no);
        }
        fn(object, line_no);
    }
}

/// Writes one compact JSON document per line, LF terminated.
inline void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    for (const auto& row : rows) {
        out << row.dump() << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

/// Writes `doc` pretty-printed with a trailing newline.
inline void write_json(const std::filesystem::path& path, const nlohmann::json& doc)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << doc.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

}  // namespace dualtrain::detail
