#pragma once

// Player embedding model and the prediction models built on its frozen
// embedding tables. One class covers all three architectures; they differ
// only in configuration (branch depth, optional feature and pitch branches,
// trunk widths, head kind).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cricrep/data.hpp"
#include "cricrep/errors.hpp"
#include "cricrep/numerics.hpp"

namespace cricrep {

enum class HeadKind { classifier, representation };
enum class ModelKind { player, predictor };

std::string to_string(HeadKind head);
std::string to_string(ModelKind kind);

struct ModelConfig {
    ModelKind kind = ModelKind::player;
    HeadKind head = HeadKind::classifier;
    std::size_t num_players = 0;
    std::size_t embed_dim = 64;
    std::vector<std::size_t> branch_widths{64};
    std::size_t feature_dim = 0;  // 0 = no feature branch
    std::size_t feature_width = 32;
    std::size_t pitch_dim = 0;  // 0 = no pitch branch
    std::size_t pitch_width = 32;
    std::vector<std::size_t> trunk_widths{64};
    std::size_t num_classes = 4;
    std::size_t rep_dim = 32;

    bool has_pitch() const { return pitch_dim > 0; }
    std::size_t trunk_input() const;
    std::size_t output_dim() const;
    void validate() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// 64-d tables, one dense+ReLU per branch, 128->64 trunk.
ModelConfig player_model_config(std::size_t num_players, HeadKind head);
/// Two dense+ReLU per branch, 32-wide feature and pitch branches, 96->48 trunk.
ModelConfig predictor_config(std::size_t num_players, std::size_t feature_dim,
                             std::size_t pitch_dim, HeadKind head);

/// One innings as the networks see it.
struct InningsInput {
    std::vector<std::size_t> batting;
    std::vector<std::size_t> bowling;
    Vector features;
    std::optional<Vector> pitch;
};

enum class Role { batting, bowling };

struct EmbeddingTable {
    Role role = Role::batting;
    ParamTensor rows;

    std::size_t size() const { return rows.value.rows(); }
    /// Re-projects every row whose norm has drifted from 1.
    void normalize_rows();
};

/// Mean of the looked-up rows.
Vector embed_team(const EmbeddingTable& table, std::span<const std::size_t> lineup);

struct DenseLayer {
    ParamTensor weight;
    ParamTensor bias;
};

/// Activations recorded by a forward pass; consumed by backward.
struct StackTrace {
    std::vector<Vector> inputs;
    std::vector<Vector> pre;
};

struct ForwardTrace {
    std::vector<std::size_t> batting_idx;
    std::vector<std::size_t> bowling_idx;
    Vector batting_pooled;
    Vector bowling_pooled;
    StackTrace batting_branch;
    StackTrace bowling_branch;
    StackTrace feature_branch;
    StackTrace pitch_branch;
    std::vector<std::size_t> part_sizes;
    StackTrace trunk;
    Vector head_input;
    Vector head_pre;  // pre-normalization output for representation heads
    Vector output;
};

/// Ids needed to turn raw records into model inputs after a reload.
struct IndexSnapshot {
    std::vector<std::string> players;
    FeatureContext features;
};

class InningsModel {
public:
    InningsModel() = default;
    explicit InningsModel(ModelConfig config);

    const ModelConfig& config() const { return config_; }

    ForwardTrace forward(const InningsInput& input) const;
    Vector output(const InningsInput& input) const { return forward(input).output; }
    /// Accumulates parameter gradients for d(loss)/d(output) = upstream.
    void backward(const ForwardTrace& trace, std::span<const double> upstream);

    /// All tensors in declared (serialization) order.
    std::vector<ParamTensor*> parameters();
    std::vector<const ParamTensor*> parameters() const;
    std::vector<std::string> parameter_names() const;

    EmbeddingTable& batting_table() { return batting_; }
    EmbeddingTable& bowling_table() { return bowling_; }
    const EmbeddingTable& batting_table() const { return batting_; }
    const EmbeddingTable& bowling_table() const { return bowling_; }

    void zero_grad();
    bool embeddings_trainable() const { return batting_.rows.trainable; }

    IndexSnapshot index;

private:
    friend InningsModel init_model(const ModelConfig&, std::uint64_t);

    ModelConfig config_;
    EmbeddingTable batting_;
    EmbeddingTable bowling_;
    std::vector<DenseLayer> batting_branch_;
    std::vector<DenseLayer> bowling_branch_;
    std::vector<DenseLayer> feature_branch_;
    std::vector<DenseLayer> pitch_branch_;
    std::vector<DenseLayer> trunk_;
    DenseLayer head_;
};

/// Glorot-uniform weights, zero biases, unit-norm Gaussian embedding rows.
InningsModel init_model(const ModelConfig& config, std::uint64_t seed);

/// Copies both embedding tables from `source` into `predictor` and freezes them.
void transfer_embeddings(const InningsModel& source, InningsModel& predictor);

void save_model(const InningsModel& model, const std::filesystem::path& path);
InningsModel load_model(const std::filesystem::path& path);
std::string serialize_model(const InningsModel& model);
InningsModel deserialize_model(const std::string& text);

/// Builds the network input for a record. Features are included when
/// `context` is given; the pitch vector is looked up when `pitch` is given.
InningsInput make_input(const InningsRecord& record, const IdIndex& players,
                        const FeatureContext* context, const PitchEmbeddingSet* pitch);

}  // namespace cricrep
