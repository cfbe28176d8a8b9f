#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cricrep/errors.hpp"
#include "cricrep/models.hpp"
#include "cricrep/numerics.hpp"
#include "cricrep/rng.hpp"

namespace cricrep {

/// A labelled network input.
struct Example {
    std::string id;
    InningsInput input;
    std::size_t label = 0;
};

enum class Objective { cross_entropy, contrastive };
enum class LossMode { hinge, paper_literal };

std::string to_string(Objective objective);
std::string to_string(LossMode mode);
Objective parse_objective(const std::string& text);
LossMode parse_loss_mode(const std::string& text);

struct ContrastiveConfig {
    double margin = 1.0;
    LossMode mode = LossMode::hinge;
    double pair_balance = 0.5;  // fraction of similar pairs per batch

    void validate() const;
};

struct TrainConfig {
    std::size_t batch_size = 64;
    std::size_t epochs = 100;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    Objective objective = Objective::cross_entropy;
    ContrastiveConfig contrastive;
    AdamConfig adam;

    void validate() const;
};

struct TrainReport {
    TrainConfig config;
    std::vector<double> loss_curve;  // mean loss per epoch
    double seconds = 0.0;
    std::string model_path;
};

/// Called after every optimizer step with the running step count.
using StepObserver = std::function<void(const InningsModel&, std::size_t step)>;

/// Pair loss. Y=0: d. Y=1: max(m - d, 0) (hinge) or min(m - d, m) (literal).
double contrastive_loss(double distance, bool dissimilar, double margin, LossMode mode);
/// dL/dd; the hinge kink at d = m takes subgradient 0.
double contrastive_loss_grad(double distance, bool dissimilar, double margin, LossMode mode);

struct PairSample {
    std::size_t first = 0;
    std::size_t second = 0;
    bool dissimilar = false;
};

/// round(balance * batch_size) same-class pairs, the rest cross-class,
/// each uniform over distinct-record pairs of its kind.
std::vector<PairSample> sample_pairs(std::span<const std::size_t> labels, std::size_t batch_size,
                                     double balance, Rng& rng);

/// Mean contrastive loss over `pairs`; accumulates gradients scaled by
/// 1/|pairs| into the shared model when `accumulate` is set.
double contrastive_batch(InningsModel& model, std::span<const Example> examples,
                         std::span<const PairSample> pairs, const ContrastiveConfig& config,
                         bool accumulate);

/// Mean cross-entropy over `batch` (example indices); same gradient contract.
double cross_entropy_batch(InningsModel& model, std::span<const Example> examples,
                           std::span<const std::size_t> batch, bool accumulate);

TrainReport train_cross_entropy(InningsModel& model, std::span<const Example> examples,
                                const TrainConfig& config, const StepObserver& observer = {});
TrainReport train_contrastive(InningsModel& model, std::span<const Example> examples,
                              const TrainConfig& config, const StepObserver& observer = {});

/// Trains a predictor whose tables came from `source` via transfer_embeddings.
/// Refuses to start unless both tables are frozen and identical to the source.
TrainReport train_predictor(InningsModel& predictor, const InningsModel& source,
                            std::span<const Example> examples, const TrainConfig& config,
                            const StepObserver& observer = {});

/// k folds partitioning 0..n-1, sizes differing by at most one.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                  std::uint64_t seed);

}  // namespace cricrep
