// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dualtrain/models.hpp"

namespace dualtrain::models {

// External models run as child processes speaking newline-delimited JSON on
// stdin/stdout, one response per request, in order:
//
//   -> {"op":"hello","version":1}
//   <- {"name":..., "role":"generator"|"retriever", "caps":[...]}
//   -> {"op":"generate","passage":..., "top_k":..., "seed":...}   <- {"question":..., "loglik":...}
//   -> {"op":"score_qg","passage":..., "question":...}            <- {"loglik":...}
//   -> {"op":"encode","kind":"q"|"p","text":...}                  <- {"vec":[...]}
//   -> {"op":"train","pairs_path":..., "negatives_path":...}      <- {"ok":true}
//   <- {"error":...} on failure
//
// Training files are JSON Lines: pairs rows {"question","passage"} and, line
// aligned, negatives rows {"negatives":[passage text, ...]}. Fine-tuning
// sends the same op with "mode":"fine_tune". Generators receive an empty
// negatives_path.

enum class PluginRole { generator, retriever };

struct PluginOptions {
    std::chrono::milliseconds handshake_timeout{30000};
    /// Zero waits indefinitely.
    std::chrono::milliseconds request_timeout{0};
};

/// Spawn failure, timeout or protocol violation. payload() holds the
/// offending bytes when there are any.
class PluginError : public ModelError {
public:
    PluginError(const std::string& what, std::string payload = {});

    const std::string& payload() const noexcept { return payload_; }

private:
    std::string payload_;
};

struct PluginInfo {
    std::string name;
    PluginRole role = PluginRole::generator;
    std::vector<std::string> caps;

    bool has(std::string_view cap) const;
};

/// One child process. Requests are serialised by an internal mutex; spawn
/// more processes for parallelism.
class PluginProcess {
public:
    static std::shared_ptr<PluginProcess> spawn(const std::string& command, PluginRole role,
                                                const PluginOptions& options = {});
    ~PluginProcess();

    PluginProcess(const PluginProcess&) = delete;
    PluginProcess& operator=(const PluginProcess&) = delete;

    /// Sends one request and returns the parsed response object. A response
    /// carrying "error" is raised as PluginError.
    nlohmann::json request(const nlohmann::json& message);

    const PluginInfo& info() const noexcept { return info_; }
    const std::string& command() const noexcept { return command_; }

private:
    PluginProcess(std::string command, PluginOptions options);
    nlohmann::json exchange(const nlohmann::json& message, std::chrono::milliseconds timeout);
    std::string read_line(std::chrono::milliseconds timeout);
    void shutdown() noexcept;

    std::string command_;
    PluginOptions options_;
    PluginInfo info_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::mutex mutex_;
};

class PluginGenerator final : public GeneratorModel {
public:
    explicit PluginGenerator(std::shared_ptr<PluginProcess> process);

    std::string name() const override { return "plugin:" + process_->info().name; }
    void train(std::span<const QgPair> pairs) override;
    void fine_tune(std::span<const QgPair> pairs) override;
    Generation generate(std::string_view passage, const DecodeConfig& decode) const override;
    double score(std::string_view passage, std::string_view question) const override;
    bool can_score() const override { return process_->info().has("score_qg"); }
    /// Shares the child process: plugin weights are not snapshotted.
    std::unique_ptr<GeneratorModel> clone() const override;
    void save(const std::filesystem::path& path) const override;

    const PluginInfo& info() const noexcept { return process_->info(); }

private:
    void send_train(std::span<const QgPair> pairs, const char* mode);

    std::shared_ptr<PluginProcess> process_;
};

/// Retriever whose encoders live in a plugin. Similarity, ranking and the
/// id tie-break are computed here, so ordering matches the native models.
class PluginRetriever final : public RetrieverModel {
public:
    explicit PluginRetriever(std::shared_ptr<PluginProcess> process);

    std::string name() const override { return "plugin:" + process_->info().name; }
    void train(std::span<const RetrievalExample> examples) override;
    void fine_tune(std::span<const RetrievalExample> examples) override;
    void index(std::span<const corpus::Passage> pool) override;
    bool indexed() const override { return indexed_; }
    std::size_t pool_size() const override { return ids_.size(); }
    std::vector<ScoredPassage> retrieve(std::string_view question, std::size_t k) const override;
    double score(std::string_view question, std::string_view passage) const override;
    bool trainable() const override { return process_->info().has("train"); }
    std::unique_ptr<RetrieverModel> clone() const override;
    void save(const std::filesystem::path& path) const override;

    const PluginInfo& info() const noexcept { return process_->info(); }

private:
    std::vector<double> encode(std::string_view text, const char* kind) const;
    void send_train(std::span<const RetrievalExample> examples, const char* mode);

    std::shared_ptr<PluginProcess> process_;
    bool indexed_ = false;
    std::vector<std::string> ids_;
    std::vector<std::string> texts_;
    std::vector<std::vector<double>> encoded_;
};

std::shared_ptr<PluginProcess> attach(const std::string& command, PluginRole role, const PluginOptions& options = {});
std::unique_ptr<GeneratorModel> attach_generator(const std::string& command, const PluginOptions& options = {});
std::unique_ptr<RetrieverModel> attach_retriever(const std::string& command, const PluginOptions& options = {});

}  // namespace dualtrain::models
