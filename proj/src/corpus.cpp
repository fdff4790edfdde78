// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#include "dualtrain/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "jsonl.hpp"

namespace dualtrain::corpus {

namespace {

bool is_unicode_space(char32_t cp)
{
    switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Decodes one UTF-8 sequence at `pos`. Invalid bytes decode as themselves
// with length 1 so they are never treated as whitespace.
char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t& len)
{
    const auto b0 = static_cast<unsigned char>(s[pos]);
    auto cont = [&](std::size_t k) {
        return pos + k < s.size() && (static_cast<unsigned char>(s[pos + k]) & 0xC0U) == 0x80U;
    };
    auto byte = [&](std::size_t k) { return static_cast<char32_t>(static_cast<unsigned char>(s[pos + k]) & 0x3FU); };
    if (b0 < 0x80U) {
        len = 1;
        return b0;
    }
    if ((b0 & 0xE0U) == 0xC0U && cont(1)) {
        len = 2;
        return (static_cast<char32_t>(b0 & 0x1FU) << 6U) | byte(1);
    }
    if ((b0 & 0xF0U) == 0xE0U && cont(1) && cont(2)) {
        len = 3;
        return (static_cast<char32_t>(b0 & 0x0FU) << 12U) | (byte(1) << 6U) | byte(2);
    }
    if ((b0 & 0xF8U) == 0xF0U && cont(1) && cont(2) && cont(3)) {
        len = 4;
        return (static_cast<char32_t>(b0 & 0x07U) << 18U) | (byte(1) << 12U) | (byte(2) << 6U) | byte(3);
    }
    len = 1;
    return 0xFFFD;
}

bool is_ascii_punct(char c)
{
    const auto u = static_cast<unsigned char>(c);
    return (u >= 0x21 && u <= 0x2F) || (u >= 0x3A && u <= 0x40) || (u >= 0x5B && u <= 0x60) ||
           (u >= 0x7B && u <= 0x7E);
}

void push_token(std::string_view raw, std::vector<std::string>& out)
{
    std::size_t begin = 0;
    std::size_t end = raw.size();
    while (begin < end && is_ascii_punct(raw[begin])) {
        ++begin;
    }
    while (end > begin && is_ascii_punct(raw[end - 1])) {
        --end;
    }
    if (begin == end) {
        return;
    }
    std::string token(raw.substr(begin, end - begin));
    for (char& c : token) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    out.push_back(std::move(token));
}

bool is_blank(std::string_view text)
{
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t len = 1;
        if (!is_unicode_space(decode_utf8(text, pos, len))) {
            return false;
        }
        pos += len;
    }
    return true;
}

struct RawText {
    std::string id;
    std::string text;
    std::size_t line = 0;
};

std::string require_string(const nlohmann::json& obj, const char* key, const std::string& file, std::size_t line)
{
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw CorpusError(std::string("missing field \"") + key + "\"", file, line);
    }
    if (!it->is_string()) {
        throw CorpusError(std::string("field \"") + key + "\" must be a string", file, line);
    }
    return it->get<std::string>();
}

std::string optional_id(const nlohmann::json& obj, const char* key, const std::string& file, std::size_t line)
{
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return file + ":" + std::to_string(line);
    }
    if (!it->is_string() || it->get<std::string>().empty()) {
        throw CorpusError(std::string("field \"") + key + "\" must be a nonempty string", file, line);
    }
    return it->get<std::string>();
}

void require_text(const std::string& text, const std::string& file, std::size_t line)
{
    if (is_blank(text)) {
        throw CorpusError("empty text", file, line);
    }
}

template <typename Item>
std::vector<Item> load_texts(const std::filesystem::path& root, const std::string& file)
{
    std::vector<Item> items;
    std::unordered_set<std::string> seen;
    detail::for_each_jsonl(root / file, file, [&](const nlohmann::json& obj, std::size_t line) {
        std::string id = optional_id(obj, "id", file, line);
        std::string text = require_string(obj, "text", file, line);
        require_text(text, file, line);
        if (!seen.insert(id).second) {
            throw CorpusError("duplicate id \"" + id + "\"", file, line);
        }
        Item item;
        item.token_count = tokenize(text).size();
        item.id = std::move(id);
        item.text = std::move(text);
        items.push_back(std::move(item));
    });
    return items;
}

std::vector<AlignedPair> load_pairs(const std::filesystem::path& root, const std::string& file, Split split)
{
    std::vector<AlignedPair> pairs;
    std::set<std::pair<std::string, std::string>> seen;
    detail::for_each_jsonl(root / file, file, [&](const nlohmann::json& obj, std::size_t line) {
        std::string question = require_string(obj, "question", file, line);
        std::string passage = require_string(obj, "passage", file, line);
        require_text(question, file, line);
        require_text(passage, file, line);
        std::string qid = optional_id(obj, "question_id", file, line);
        std::string pid = optional_id(obj, "passage_id", file, line);
        if (!seen.emplace(qid, pid).second) {
            throw CorpusError("duplicate pair (" + qid + ", " + pid + ")", file, line);
        }
        pairs.push_back(AlignedPair{make_question(std::move(qid), std::move(question)),
                                    make_passage(std::move(pid), std::move(passage)), split});
    });
    return pairs;
}

// Adds `p` to the pool unless its id is present; conflicting text is an error.
void merge_passage(std::vector<Passage>& pool, std::unordered_map<std::string, std::size_t>& index,
                   const Passage& p)
{
    auto [it, inserted] = index.emplace(p.id, pool.size());
    if (inserted) {
        pool.push_back(p);
    } else if (pool[it->second].text != p.text) {
        throw CorpusError("passage id \"" + p.id + "\" is used with two different texts");
    }
}

template <typename Item>
void check_unique_ids(const std::vector<Item>& items, const char* what, std::vector<std::string>& errors)
{
    std::unordered_set<std::string> seen;
    for (const auto& item : items) {
        if (item.id.empty()) {
            errors.push_back(std::string(what) + ": empty id");
        } else if (!seen.insert(item.id).second) {
            errors.push_back(std::string(what) + ": duplicate id \"" + item.id + "\"");
        }
        if (is_blank(item.text)) {
            errors.push_back(std::string(what) + ": empty text for id \"" + item.id + "\"");
        }
    }
}

std::set<std::pair<std::string, std::string>> pair_ids(const std::vector<AlignedPair>& pairs)
{
    std::set<std::pair<std::string, std::string>> ids;
    for (const auto& p : pairs) {
        ids.emplace(p.question.id, p.passage.id);
    }
    return ids;
}

nlohmann::json text_row(const std::string& id, const std::string& text)
{
    return {{"id", id}, {"text", text}};
}

nlohmann::json pair_row(const AlignedPair& p)
{
    return {{"question", p.question.text},
            {"question_id", p.question.id},
            {"passage", p.passage.text},
            {"passage_id", p.passage.id}};
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    std::size_t start = 0;
    while (pos < text.size()) {
        std::size_t len = 1;
        const char32_t cp = decode_utf8(text, pos, len);
        if (is_unicode_space(cp)) {
            if (pos > start) {
                push_token(text.substr(start, pos - start), tokens);
            }
            start = pos + len;
        }
        pos += len;
    }
    if (start < text.size()) {
        push_token(text.substr(start), tokens);
    }
    return tokens;
}

std::string join(const std::vector<std::string>& tokens)
{
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i != 0) {
            out.push_back(' ');
        }
        out += tokens[i];
    }
    return out;
}

Passage make_passage(std::string id, std::string text)
{
    if (is_blank(text)) {
        throw CorpusError("empty text for passage \"" + id + "\"");
    }
    const std::size_t n = tokenize(text).size();
    return Passage{std::move(id), std::move(text), n};
}

Question make_question(std::string id, std::string text)
{
    if (is_blank(text)) {
        throw CorpusError("empty text for question \"" + id + "\"");
    }
    const std::size_t n = tokenize(text).size();
    return Question{std::move(id), std::move(text), n};
}

std::string_view to_string(Split split)
{
    switch (split) {
    case Split::source_train: return "source_train";
    case Split::target_dev: return "target_dev";
    case Split::target_test: return "target_test";
    }
    return "unknown";
}

CorpusError::CorpusError(const std::string& what, std::string file, std::size_t line)
    : std::runtime_error(file.empty() ? what
                         : line == 0  ? file + ": " + what
                                      : file + ":" + std::to_string(line) + ": " + what),
      file_(std::move(file)),
      line_(line)
{}

Manifest Manifest::from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw CorpusError("manifest must be a JSON object");
    }
    static const std::set<std::string> known = {"source_pairs", "target_passages", "target_questions",
                                                "dev_pairs", "test_pairs", "candidate_passages"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw CorpusError("manifest: unknown key \"" + key + "\"");
        }
        if (!value.is_string()) {
            throw CorpusError("manifest: \"" + key + "\" must be a path string");
        }
    }
    auto get = [&](const char* key, bool required) -> std::string {
        auto it = j.find(key);
        if (it == j.end()) {
            if (required) {
                throw CorpusError(std::string("manifest: missing \"") + key + "\"");
            }
            return {};
        }
        return it->get<std::string>();
    };
    Manifest m;
    m.source_pairs = get("source_pairs", true);
    m.target_passages = get("target_passages", true);
    m.target_questions = get("target_questions", true);
    m.dev_pairs = get("dev_pairs", true);
    m.test_pairs = get("test_pairs", true);
    m.candidate_passages = get("candidate_passages", false);
    return m;
}

Manifest Manifest::read(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw CorpusError("cannot open manifest " + path.string());
    }
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw CorpusError("malformed manifest at byte " + std::to_string(e.byte), path.string());
    }
}

nlohmann::json Manifest::to_json() const
{
    nlohmann::json j = {{"source_pairs", source_pairs},   {"target_passages", target_passages},
                        {"target_questions", target_questions}, {"dev_pairs", dev_pairs},
                        {"test_pairs", test_pairs}};
    if (!candidate_passages.empty()) {
        j["candidate_passages"] = candidate_passages;
    }
    return j;
}

CorpusBundle load_corpus(const std::filesystem::path& root, const Manifest& manifest)
{
    CorpusBundle b;
    b.source_pairs = load_pairs(root, manifest.source_pairs, Split::source_train);
    b.target_passages = load_texts<Passage>(root, manifest.target_passages);
    b.target_questions = load_texts<Question>(root, manifest.target_questions);
    b.dev_pairs = load_pairs(root, manifest.dev_pairs, Split::target_dev);
    b.test_pairs = load_pairs(root, manifest.test_pairs, Split::target_test);

    std::unordered_map<std::string, std::size_t> index;
    if (manifest.candidate_passages.empty()) {
        for (const auto& p : b.target_passages) {
            merge_passage(b.candidate_passages, index, p);
        }
        for (const auto* split : {&b.dev_pairs, &b.test_pairs}) {
            for (const auto& pair : *split) {
                merge_passage(b.candidate_passages, index, pair.passage);
            }
        }
    } else {
        b.candidate_passages = load_texts<Passage>(root, manifest.candidate_passages);
        for (std::size_t i = 0; i < b.candidate_passages.size(); ++i) {
            index.emplace(b.candidate_passages[i].id, i);
        }
        for (const auto* split : {&b.dev_pairs, &b.test_pairs}) {
            for (const auto& pair : *split) {
                auto it = index.find(pair.passage.id);
                if (it != index.end() && b.candidate_passages[it->second].text != pair.passage.text) {
                    throw CorpusError("gold passage \"" + pair.passage.id +
                                      "\" differs from the candidate pool entry with the same id");
                }
            }
        }
    }

    const ValidationReport report = validate(b);
    if (!report.ok()) {
        throw CorpusError(report.errors.front());
    }
    return b;
}

ValidationReport validate(const CorpusBundle& b)
{
    ValidationReport r;
    r.source_pairs = b.source_pairs.size();
    r.target_passages = b.target_passages.size();
    r.target_questions = b.target_questions.size();
    r.dev_pairs = b.dev_pairs.size();
    r.test_pairs = b.test_pairs.size();
    r.candidate_passages = b.candidate_passages.size();

    check_unique_ids(b.target_passages, "target_passages", r.errors);
    check_unique_ids(b.target_questions, "target_questions", r.errors);
    check_unique_ids(b.candidate_passages, "candidate_passages", r.errors);

    const std::pair<const std::vector<AlignedPair>*, const char*> splits[] = {
        {&b.source_pairs, "source_pairs"}, {&b.dev_pairs, "dev_pairs"}, {&b.test_pairs, "test_pairs"}};
    for (const auto& [pairs, name] : splits) {
        if (pair_ids(*pairs).size() != pairs->size()) {
            r.errors.push_back(std::string(name) + ": duplicate (question_id, passage_id) pair");
        }
    }

    const auto dev_ids = pair_ids(b.dev_pairs);
    for (const auto& id : pair_ids(b.test_pairs)) {
        if (dev_ids.contains(id)) {
            r.errors.push_back("pair (" + id.first + ", " + id.second + ") appears in both dev and test");
        }
    }

    std::unordered_set<std::string> candidate_ids;
    for (const auto& p : b.candidate_passages) {
        candidate_ids.insert(p.id);
    }
    std::unordered_set<std::string> target_texts;
    for (const auto& p : b.target_passages) {
        target_texts.insert(p.text);
    }
    for (const auto& [pairs, name] : {splits[1], splits[2]}) {
        for (const auto& pair : *pairs) {
            if (!candidate_ids.contains(pair.passage.id)) {
                r.errors.push_back(std::string(name) + ": gold passage \"" + pair.passage.id +
                                   "\" is missing from candidate_passages");
            }
            if (target_texts.contains(pair.passage.text)) {
                ++r.dev_test_passages_in_target_pool;
            }
        }
    }
    return r;
}

nlohmann::json ValidationReport::to_json() const
{
    return {{"ok", ok()},
            {"source_pairs", source_pairs},
            {"target_passages", target_passages},
            {"target_questions", target_questions},
            {"dev_pairs", dev_pairs},
            {"test_pairs", test_pairs},
            {"candidate_passages", candidate_passages},
            {"dev_test_passages_in_target_pool", dev_test_passages_in_target_pool},
            {"errors", errors}};
}

void write_bundle(const CorpusBundle& b, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto pairs_rows = [](const std::vector<AlignedPair>& pairs) {
        std::vector<nlohmann::json> rows;
        rows.reserve(pairs.size());
        for (const auto& p : pairs) {
            rows.push_back(pair_row(p));
        }
        return rows;
    };
    auto text_rows = [](const auto& items) {
        std::vector<nlohmann::json> rows;
        rows.reserve(items.size());
        for (const auto& item : items) {
            rows.push_back(text_row(item.id, item.text));
        }
        return rows;
    };
    detail::write_jsonl(dir / "source_pairs.jsonl", pairs_rows(b.source_pairs));
    detail::write_jsonl(dir / "target_passages.jsonl", text_rows(b.target_passages));
    detail::write_jsonl(dir / "target_questions.jsonl", text_rows(b.target_questions));
    detail::write_jsonl(dir / "dev_pairs.jsonl", pairs_rows(b.dev_pairs));
    detail::write_jsonl(dir / "test_pairs.jsonl", pairs_rows(b.test_pairs));
    detail::write_jsonl(dir / "candidate_passages.jsonl", text_rows(b.candidate_passages));

    Manifest m{"source_pairs.jsonl", "target_passages.jsonl", "target_questions.jsonl",
               "dev_pairs.jsonl",    "test_pairs.jsonl",      "candidate_passages.jsonl"};
    detail::write_json(dir / "manifest.json", m.to_json());
}

}  // namespace dualtrain::corpus
