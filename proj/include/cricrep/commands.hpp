#pragma once

// Command-line pipeline: one JSON run configuration, overridable by flags,
// echoed into every output directory.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cricrep/clustering.hpp"
#include "cricrep/training.hpp"

namespace cricrep {

struct RunConfig {
    std::string dataset;
    std::string labels;
    std::string pitch_embeddings;
    std::string embed_model;
    std::string predict_model;
    std::string out;
    std::uint64_t seed = 0;
    Objective objective = Objective::contrastive;
    bool pitch = false;
    std::size_t k = 1;
    std::size_t per_class = 10;
    std::size_t seeds = 5;  // experiment: root seeds seed, seed+1, ...
    TrainConfig train;      // used for both the embedding and the predictor stage

    /// Unknown keys and malformed values raise ConfigurationError.
    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;
};

nlohmann::ordered_json to_json(const TrainConfig& config);
nlohmann::ordered_json to_json(const TrainReport& report);

/// Labels file: {"centroids", "provenance", "elbow"}.
void save_labels(const std::filesystem::path& path, const LabelScheme& scheme,
                 const ElbowCurve& curve, std::size_t elbow_k, std::uint64_t seed);
LabelScheme load_labels(const std::filesystem::path& path);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int usage = 2;
inline constexpr int numeric = 3;
}  // namespace exit_code

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cricrep
