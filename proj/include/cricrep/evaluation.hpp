#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cricrep/clustering.hpp"
#include "cricrep/data.hpp"
#include "cricrep/models.hpp"
#include "cricrep/training.hpp"

namespace cricrep {

struct RepresentationIndex {
    DenseMatrix reps;  // n x rep_dim, dataset order
    std::vector<std::size_t> labels;
    std::vector<std::string> ids;

    std::size_t size() const { return labels.size(); }
};

RepresentationIndex build_index(const InningsModel& model, std::span<const Example> train);

struct Neighbor {
    std::size_t row = 0;
    double distance = 0.0;
};

/// The k closest index rows by euclidean distance; equal distances keep
/// index order.
std::vector<Neighbor> nearest_neighbors(const RepresentationIndex& index,
                                        std::span<const double> query, std::size_t k);

/// Majority label among the k nearest rows; ties go to the smaller summed
/// distance, then the smaller class id.
std::size_t classify_by_similarity(const RepresentationIndex& index,
                                   std::span<const double> query, std::size_t k = 1);

/// Argmax, ties to the smaller class id.
std::size_t classify_by_logits(std::span<const double> logits);

struct ConfusionMatrix {
    static constexpr std::size_t kClasses = LabelScheme::kNumClasses;
    std::array<std::array<std::size_t, kClasses>, kClasses> counts{};  // [true][pred]

    std::size_t total() const;
    std::size_t trace() const;
    double accuracy() const;
};

ConfusionMatrix confusion_and_accuracy(std::span<const std::size_t> preds,
                                       std::span<const std::size_t> truths);

/// Percentile bootstrap over the mean of `correct`.
std::pair<double, double> bootstrap_ci(const std::vector<bool>& correct, double level,
                                       std::size_t resamples, std::uint64_t seed);

struct Setting {
    Objective objective = Objective::cross_entropy;
    bool pitch = false;

    std::string name() const;
    friend bool operator==(const Setting&, const Setting&) = default;
};

/// ce/off, ce/on, contrastive/off, contrastive/on.
std::vector<Setting> all_settings();

struct EvalReport {
    Setting setting;
    std::uint64_t seed = 0;
    ConfusionMatrix matrix;
    double accuracy = 0.0;
    std::pair<double, double> ci95{0.0, 0.0};
    std::vector<bool> correct;
};

struct AggregateReport {
    Setting setting;
    std::vector<std::uint64_t> seeds;
    std::vector<double> accuracies;
    double mean_accuracy = 0.0;
    std::pair<double, double> ci95{0.0, 0.0};  // bootstrap over pooled test predictions
};

struct ExperimentOptions {
    std::size_t per_class = 10;
    std::size_t k = 1;
    std::size_t resamples = 2000;
    TrainConfig embed_train;    // objective and seed are set per run
    TrainConfig predict_train;  // objective and seed are set per run
};

/// Builds training examples for `indices` of the dataset.
std::vector<Example> make_examples(const Dataset& dataset, const LabelScheme& scheme,
                                   std::span<const std::size_t> indices,
                                   const FeatureContext* features,
                                   const PitchEmbeddingSet* pitch);

/// Predicts every test example: argmax for classifier heads, k-NN against
/// `index` for representation heads.
std::vector<std::size_t> predict_all(const InningsModel& model, std::span<const Example> test,
                                     const RepresentationIndex* index, std::size_t k);

EvalReport evaluate(const InningsModel& model, std::span<const Example> train,
                    std::span<const Example> test, const Setting& setting, std::uint64_t seed,
                    const ExperimentOptions& options);

/// Named sub-seed of a root seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

/// Classifier head for cross-entropy, representation head for contrastive.
HeadKind head_for(Objective objective);

struct FittedModel {
    InningsModel model;
    TrainReport report;
};

/// Player embedding model trained on the split's train part. Init and
/// training streams derive from `root_seed`.
FittedModel fit_player_model(const Dataset& dataset, const LabelScheme& scheme,
                             const Split& split, Objective objective, const TrainConfig& base,
                             std::uint64_t root_seed);

/// Predictor on frozen tables transferred from `player`; the objective follows
/// the player's head. A pitch branch is built iff `pitch` is given.
FittedModel fit_predictor(const Dataset& dataset, const LabelScheme& scheme, const Split& split,
                          const InningsModel& player, const PitchEmbeddingSet* pitch,
                          const TrainConfig& base, std::uint64_t root_seed);

struct ExperimentResult {
    std::vector<EvalReport> reports;  // seed-major, settings in the given order
    std::vector<AggregateReport> aggregates;
};

/// Per seed: 10-per-class split, player model, frozen transfer, predictor,
/// evaluation. Split, init and sampling streams derive from the seed alone so
/// settings are paired. Player models are shared between pitch on/off.
ExperimentResult run_experiment(const Dataset& dataset, const LabelScheme& scheme,
                                const PitchEmbeddingSet* pitch,
                                std::span<const Setting> settings,
                                std::span<const std::uint64_t> seeds,
                                const ExperimentOptions& options);

nlohmann::ordered_json to_json(const EvalReport& report);
nlohmann::ordered_json to_json(const AggregateReport& report);
std::string render_confusion(const ConfusionMatrix& matrix);

}  // namespace cricrep
