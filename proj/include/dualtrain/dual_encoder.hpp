// Copyright (c) 2026, the dualtrain authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "dualtrain/models.hpp"

namespace dualtrain::models {

struct DualEncoderConfig {
    std::size_t dim = 64;
    std::size_t epochs = 5;
    std::size_t batch = 32;
    double lr = 1e-5;
    /// The SGD step is lr * lr_scale.
    double lr_scale = 5000.0;
    std::uint64_t seed = 0;

    double effective_lr() const noexcept { return lr * lr_scale; }
    void validate() const;
    nlohmann::json to_json() const;
    static DualEncoderConfig from_json(const nlohmann::json& j);
};

/// Linear dual encoder: E(text) is the sum of per-token embeddings from one
/// table shared by questions and passages, and similarity is the dot product
/// E(q) . E(p). A token's row starts from a vector seeded by the FNV-1a hash
/// of the token, so the untrained model is fully defined for any text.
///
/// Training minimises, per example, -log softmax of the gold similarity over
/// {gold} + negatives with mini-batch gradient descent on the mean loss.
class DualEncoder final : public RetrieverModel {
public:
    using Vector = std::vector<double>;
    /// Sparse gradient: token -> d(loss)/d(embedding).
    using Gradient = std::map<std::string, Vector>;

    explicit DualEncoder(DualEncoderConfig config = {});

    std::string name() const override { return "dual_encoder"; }
    void train(std::span<const RetrievalExample> examples) override;
    void fine_tune(std::span<const RetrievalExample> examples) override;
    void index(std::span<const corpus::Passage> pool) override;
    bool indexed() const override { return indexed_; }
    std::size_t pool_size() const override { return ids_.size(); }
    std::vector<ScoredPassage> retrieve(std::string_view question, std::size_t k) const override;
    double score(std::string_view question, std::string_view passage) const override;
    std::unique_ptr<RetrieverModel> clone() const override;
    void save(const std::filesystem::path& path) const override;

    Vector encode(std::string_view text) const;
    /// Current row for `token` (the hash initialisation when never updated).
    Vector embedding(const std::string& token) const;
    void set_embedding(const std::string& token, Vector value);

    /// Mean contrastive loss over the examples.
    double loss(std::span<const RetrievalExample> examples) const;
    /// Gradient of loss() with respect to every embedding row it touches.
    Gradient gradient(std::span<const RetrievalExample> examples) const;

    const DualEncoderConfig& config() const noexcept { return config_; }
    std::size_t steps() const noexcept { return steps_; }

    nlohmann::json to_json() const;
    static DualEncoder from_json(const nlohmann::json& j);

private:
    Vector initial_row(const std::string& token) const;
    const Vector* trained_row(const std::string& token) const;
    double example_loss(const RetrievalExample& ex, Gradient* grad, double weight) const;
    void run_epochs(std::span<const RetrievalExample> examples);

    DualEncoderConfig config_;
    std::unordered_map<std::string, Vector> table_;
    std::size_t rounds_ = 0;
    std::size_t steps_ = 0;

    bool indexed_ = false;
    std::vector<std::string> ids_;
    std::vector<std::string> pool_texts_;
    std::vector<Vector> encoded_;
};

}  // namespace dualtrain::models
