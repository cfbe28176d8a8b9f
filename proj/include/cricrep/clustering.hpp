#pragma once

// Run-rate class construction: 1-D k-means, elbow selection of k, and the
// single majority-class split that turns 3 clusters into 4 classes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cricrep/errors.hpp"

namespace cricrep {

struct ClusterModel {
    std::size_t k = 0;
    std::vector<double> centroids;  // ascending, runs/over
    double inertia = 0.0;
    /// Inertia after every Lloyd iteration of the winning restart.
    std::vector<double> inertia_trace;

    /// Index of the nearest centroid; exact ties go to the lower index.
    std::size_t nearest(double value) const;
};

struct KMeansOptions {
    std::size_t max_iter = 200;
    double tol = 1e-6;
    std::size_t restarts = 10;
};

ClusterModel kmeans_1d(std::span<const double> values, std::size_t k, std::uint64_t seed,
                       const KMeansOptions& opts = {});

struct ElbowCurve {
    std::vector<std::pair<std::size_t, double>> points;  // (k, dispersion)
};

ElbowCurve elbow_curve(std::span<const double> values, std::size_t k_min, std::size_t k_max,
                       std::uint64_t seed, const KMeansOptions& opts = {});

/// Knee of the curve: the interior point lying furthest below the chord from
/// the first to the last point, with both axes rescaled to [0, 1]. Ties go to
/// the smaller k.
std::size_t select_elbow(const ElbowCurve& curve);

class LabelScheme {
public:
    LabelScheme() = default;
    LabelScheme(std::vector<double> centroids, std::size_t split_class);

    static constexpr std::size_t kNumClasses = 4;

    const std::vector<double>& centroids() const { return centroids_; }
    /// Index of the 3-cluster class that was split.
    std::size_t split_class() const { return split_class_; }

    /// Nearest centroid; exact midpoint ties go to the lower class id.
    std::size_t assign(double run_rate) const;

    friend bool operator==(const LabelScheme&, const LabelScheme&) = default;

private:
    std::vector<double> centroids_;
    std::size_t split_class_ = 0;
};

/// Splits the most populated cluster of a 3-cluster model with a k=2 rerun on
/// its members. Majority ties go to the lowest centroid.
LabelScheme hierarchical_refine(const ClusterModel& model, std::span<const double> values,
                                std::uint64_t seed, const KMeansOptions& opts = {});

std::size_t assign_class(const LabelScheme& scheme, double run_rate);

}  // namespace cricrep
