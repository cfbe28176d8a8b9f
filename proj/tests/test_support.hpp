#pragma once

// Shared fixtures for the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <utility>
#include <string>
#include <vector>

#include <unistd.h>

#include "cricrep/data.hpp"
#include "cricrep/evaluation.hpp"
#include "cricrep/models.hpp"
#include "cricrep/rng.hpp"
#include "cricrep/training.hpp"

namespace cricrep::fixtures {

inline SyntheticData toy_data(std::uint64_t seed, std::size_t players = 24,
                              std::size_t innings = 80) {
    SyntheticSpec spec;
    spec.num_players = players;
    spec.num_innings = innings;
    spec.num_venues = 3;
    spec.pitch_dim = 4;
    spec.seed = seed;
    return generate_synthetic(spec);
}

/// Four classes by quartile-ish centroids over the toy's own run rates.
inline LabelScheme toy_scheme(const Dataset& ds) {
    auto rates = ds.run_rates();
    std::sort(rates.begin(), rates.end());
    auto q = [&](double f) { return rates[static_cast<std::size_t>(f * (rates.size() - 1))]; };
    return LabelScheme({q(0.125), q(0.375), q(0.625), q(0.875)}, 1);
}

inline std::vector<Example> toy_examples(const SyntheticData& data, bool features, bool pitch) {
    const LabelScheme scheme = toy_scheme(data.dataset);
    const FeatureContext ctx = FeatureContext::of(data.dataset);
    std::vector<std::size_t> all(data.dataset.records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return make_examples(data.dataset, scheme, all, features ? &ctx : nullptr,
                         pitch ? &data.pitch : nullptr);
}

inline double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) /
           std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

/// True if any ReLU pre-activation of `input` lies within `margin` of zero,
/// where a central difference with a small step can straddle the kink.
inline bool near_kink(const InningsModel& model, const InningsInput& input, double margin = 1e-4) {
    const ForwardTrace t = model.forward(input);
    for (const StackTrace* s : {&t.batting_branch, &t.bowling_branch, &t.feature_branch,
                                &t.pitch_branch, &t.trunk}) {
        for (const auto& layer : s->pre) {
            for (double z : layer) {
                if (std::abs(z) < margin) return true;
            }
        }
    }
    return false;
}

struct GradCheckResult {
    double worst = 0.0;
    std::size_t checked = 0;
    std::string worst_at;
};

/// Central differences on sampled parameter entries against the gradients
/// that `accumulate` leaves in the model. Entries with a nonzero analytic
/// gradient are preferred so embedding rows outside the lineups do not
/// dominate the sample.
inline GradCheckResult check_parameter_gradients(
    InningsModel& model, const std::function<double(InningsModel&)>& loss,
    const std::function<void(InningsModel&)>& accumulate, Rng& rng, std::size_t per_tensor,
    double h = 1e-5) {
    model.zero_grad();
    accumulate(model);
    const auto names = model.parameter_names();
    auto params = model.parameters();
    GradCheckResult res;
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& values = params[p]->value.values();
        const auto grads = params[p]->grad.values();
        std::vector<std::size_t> live;
        for (std::size_t i = 0; i < grads.size(); ++i) {
            if (grads[i] != 0.0) live.push_back(i);
        }
        for (std::size_t s = 0; s < per_tensor; ++s) {
            const bool from_live = !live.empty() && s + 1 < per_tensor;
            const std::size_t i =
                from_live ? live[rng.index(live.size())] : rng.index(values.size());
            const double orig = values[i];
            values[i] = orig + h;
            const double up = loss(model);
            values[i] = orig - h;
            const double down = loss(model);
            values[i] = orig;
            const double err = relative_error(grads[i], (up - down) / (2.0 * h));
            ++res.checked;
            if (err > res.worst) {
                res.worst = err;
                res.worst_at = names[p] + "[" + std::to_string(i) + "]";
            }
        }
    }
    model.zero_grad();
    return res;
}

/// k-NN vote by exhaustive scan with a full sort, independent of
/// nearest_neighbors: majority, then smaller summed distance, then smaller class.
inline std::size_t oracle_knn_class(const RepresentationIndex& idx, std::span<const double> q,
                                    std::size_t k) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            const double t = idx.reps.at(i, j) - q[j];
            s += t * t;
        }
        d.emplace_back(std::sqrt(s), i);
    }
    std::sort(d.begin(), d.end());
    std::vector<std::size_t> count(LabelScheme::kNumClasses, 0);
    std::vector<double> dist(LabelScheme::kNumClasses, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        count[idx.labels[d[i].second]]++;
        dist[idx.labels[d[i].second]] += d[i].first;
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < count.size(); ++c) {
        if (count[c] > count[best] || (count[c] == count[best] && dist[c] < dist[best])) best = c;
    }
    return best;
}

/// Random unit-norm index with uniform labels.
inline RepresentationIndex random_index(Rng& rng, std::size_t n, std::size_t dim) {
    RepresentationIndex idx;
    idx.reps = DenseMatrix(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        Vector v(dim);
        for (double& x : v) x = rng.normal();
        const Vector u = l2_normalize(v);
        std::copy(u.begin(), u.end(), idx.reps.row(i).begin());
        idx.labels.push_back(rng.index(LabelScheme::kNumClasses));
        idx.ids.push_back("r" + std::to_string(i));
    }
    return idx;
}

/// Fresh empty directory under the system temp dir, private to this process.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("cricrep-test-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace cricrep::fixtures
