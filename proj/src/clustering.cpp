#include "cricrep/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

#include "cricrep/rng.hpp"

namespace cricrep {

namespace {

std::size_t nearest_index(std::span<const double> centroids, double v) {
    std::size_t best = 0;
    double best_d = std::abs(v - centroids[0]);
    for (std::size_t j = 1; j < centroids.size(); ++j) {
        const double d = std::abs(v - centroids[j]);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

double inertia_of(std::span<const double> values, std::span<const double> centroids) {
    double total = 0.0;
    for (double v : values) {
        const double d = v - centroids[nearest_index(centroids, v)];
        total += d * d;
    }
    return total;
}

std::vector<double> plus_plus_seeds(std::span<const double> values, std::size_t k, Rng& rng) {
    std::vector<double> seeds{values[rng.index(values.size())]};
    std::vector<double> dist2(values.size());
    while (seeds.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double d = values[i] - seeds[nearest_index(seeds, values[i])];
            dist2[i] = d * d;
            total += dist2[i];
        }
        std::size_t pick = values.size() - 1;
        double target = rng.uniform() * total;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (dist2[i] == 0.0) continue;
            if (target < dist2[i]) {
                pick = i;
                break;
            }
            target -= dist2[i];
        }
        // rounding can land the pick on an already-covered value
        if (dist2[pick] == 0.0) {
            pick = static_cast<std::size_t>(
                std::max_element(dist2.begin(), dist2.end()) - dist2.begin());
        }
        seeds.push_back(values[pick]);
    }
    return seeds;
}

struct LloydRun {
    std::vector<double> centroids;
    double inertia = 0.0;
    std::vector<double> trace;
};

LloydRun lloyd(std::span<const double> values, std::vector<double> centroids,
               const KMeansOptions& opts) {
    const std::size_t k = centroids.size();
    std::vector<std::size_t> assignment(values.size());
    LloydRun run;
    for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
        double inertia = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            assignment[i] = nearest_index(centroids, values[i]);
            const double d = values[i] - centroids[assignment[i]];
            inertia += d * d;
        }
        if (!run.trace.empty()) {
            const double prev = run.trace.back();
            if (inertia > prev + 1e-12 * std::max(1.0, prev)) {
                throw std::logic_error("kmeans_1d: inertia increased from " +
                                       std::to_string(prev) + " to " +
                                       std::to_string(inertia));
            }
        }
        run.trace.push_back(inertia);

        std::vector<double> sums(k, 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < values.size(); ++i) {
            sums[assignment[i]] += values[i];
            counts[assignment[i]] += 1;
        }
        std::vector<double> next(k);
        for (std::size_t j = 0; j < k; ++j) {
            next[j] = counts[j] > 0 ? sums[j] / static_cast<double>(counts[j]) : centroids[j];
        }
        // An empty cluster takes over the worst-served value.
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] > 0) continue;
            std::size_t worst = 0;
            double worst_d = -1.0;
            for (std::size_t i = 0; i < values.size(); ++i) {
                const double d = std::abs(values[i] - next[assignment[i]]);
                if (d > worst_d) {
                    worst_d = d;
                    worst = i;
                }
            }
            next[j] = values[worst];
            assignment[worst] = j;
        }
        double shift = 0.0;
        for (std::size_t j = 0; j < k; ++j) shift = std::max(shift, std::abs(next[j] - centroids[j]));
        centroids = std::move(next);
        if (shift < opts.tol) break;
    }
    std::sort(centroids.begin(), centroids.end());
    run.inertia = inertia_of(values, centroids);
    run.centroids = std::move(centroids);
    return run;
}

}  // namespace

std::size_t ClusterModel::nearest(double value) const {
    return nearest_index(centroids, value);
}

ClusterModel kmeans_1d(std::span<const double> values, std::size_t k, std::uint64_t seed,
                       const KMeansOptions& opts) {
    if (k == 0 || values.size() < k) {
        throw ValidationError("kmeans_1d: need 1 <= k <= n, got k=" + std::to_string(k) +
                              ", n=" + std::to_string(values.size()));
    }
    std::set<double> distinct;
    for (double v : values) {
        if (!std::isfinite(v)) throw ValidationError("kmeans_1d: non-finite value");
        distinct.insert(v);
    }
    if (distinct.size() < k) {
        throw DegenerateDataError("kmeans_1d: " + std::to_string(distinct.size()) +
                                  " distinct values for k=" + std::to_string(k));
    }

    Rng rng = Rng::derive(seed, "kmeans_1d");
    ClusterModel best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < std::max<std::size_t>(1, opts.restarts); ++r) {
        LloydRun run = lloyd(values, plus_plus_seeds(values, k, rng), opts);
        if (run.inertia < best.inertia) {
            best.k = k;
            best.centroids = std::move(run.centroids);
            best.inertia = run.inertia;
            best.inertia_trace = std::move(run.trace);
        }
    }
    return best;
}

ElbowCurve elbow_curve(std::span<const double> values, std::size_t k_min, std::size_t k_max,
                       std::uint64_t seed, const KMeansOptions& opts) {
    if (k_min < 1 || k_max < k_min + 2) {
        throw ValidationError("elbow_curve: need k_min >= 1 and k_max >= k_min + 2, got [" +
                              std::to_string(k_min) + ", " + std::to_string(k_max) + "]");
    }
    ElbowCurve curve;
    for (std::size_t k = k_min; k <= k_max; ++k) {
        curve.points.emplace_back(k, kmeans_1d(values, k, seed + k, opts).inertia);
    }
    return curve;
}

std::size_t select_elbow(const ElbowCurve& curve) {
    const auto& pts = curve.points;
    if (pts.size() < 3) {
        throw ValidationError("select_elbow: need at least 3 points, got " +
                              std::to_string(pts.size()));
    }
    const double k0 = static_cast<double>(pts.front().first);
    const double k_span = static_cast<double>(pts.back().first) - k0;
    const double d_first = pts.front().second;
    const double d_span = d_first - pts.back().second;

    std::size_t best_k = pts[1].first;
    double best_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const double x = (static_cast<double>(pts[i].first) - k0) / k_span;
        const double y = d_span != 0.0 ? (pts[i].second - pts.back().second) / d_span : 0.0;
        const double gap = (1.0 - x) - y;
        if (gap > best_gap + 1e-12) {
            best_gap = gap;
            best_k = pts[i].first;
        }
    }
    return best_k;
}

LabelScheme::LabelScheme(std::vector<double> centroids, std::size_t split_class)
    : centroids_(std::move(centroids)), split_class_(split_class) {
    if (centroids_.size() != kNumClasses) {
        throw ValidationError("LabelScheme: expected 4 centroids, got " +
                              std::to_string(centroids_.size()));
    }
    for (std::size_t i = 0; i < centroids_.size(); ++i) {
        if (!std::isfinite(centroids_[i]) || (i > 0 && !(centroids_[i] > centroids_[i - 1]))) {
            throw ValidationError("LabelScheme: centroids must be finite and strictly ascending");
        }
    }
    if (split_class_ >= 3) {
        throw ValidationError("LabelScheme: split class must be one of the 3 initial clusters");
    }
}

std::size_t LabelScheme::assign(double run_rate) const {
    if (!std::isfinite(run_rate) || run_rate < 0.0) {
        throw ValidationError("assign_class: run rate must be finite and >= 0, got " +
                              std::to_string(run_rate));
    }
    return nearest_index(centroids_, run_rate);
}

std::size_t assign_class(const LabelScheme& scheme, double run_rate) {
    return scheme.assign(run_rate);
}

LabelScheme hierarchical_refine(const ClusterModel& model, std::span<const double> values,
                                std::uint64_t seed, const KMeansOptions& opts) {
    if (model.k != 3 || model.centroids.size() != 3) {
        throw ValidationError("hierarchical_refine: expects a 3-cluster model, got k=" +
                              std::to_string(model.k));
    }
    std::vector<std::vector<double>> members(3);
    for (double v : values) members[model.nearest(v)].push_back(v);

    std::size_t majority = 0;
    for (std::size_t j = 1; j < 3; ++j) {
        if (members[j].size() > members[majority].size()) majority = j;
    }
    const auto& group = members[majority];
    const std::set<double> distinct(group.begin(), group.end());
    if (distinct.size() < 2) {
        throw DegenerateDataError("hierarchical_refine: majority cluster " +
                                  std::to_string(majority) + " has " +
                                  std::to_string(distinct.size()) +
                                  " distinct values, cannot split");
    }
    const ClusterModel sub = kmeans_1d(group, 2, seed, opts);

    std::vector<double> centroids;
    for (std::size_t j = 0; j < 3; ++j) {
        if (j == majority) {
            centroids.insert(centroids.end(), sub.centroids.begin(), sub.centroids.end());
        } else {
            centroids.push_back(model.centroids[j]);
        }
    }
    std::sort(centroids.begin(), centroids.end());
    return LabelScheme(std::move(centroids), majority);
}

}  // namespace cricrep
