#include "cricrep/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cricrep {

namespace {

std::string vec_shape(std::size_t n) { return "(" + std::to_string(n) + ")"; }

void require(bool ok, const std::string& what) {
    if (!ok) throw ShapeError(what);
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    require(values_.size() == rows * cols,
            "matrix " + shape_string() + " given " + std::to_string(values_.size()) +
                " values");
}

void DenseMatrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool DenseMatrix::all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
}

std::string DenseMatrix::shape_string() const {
    return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

ParamTensor::ParamTensor(DenseMatrix v, bool trainable_flag)
    : value(std::move(v)), grad(value.rows(), value.cols()), trainable(trainable_flag) {}

AdamState::AdamState(std::size_t rows, std::size_t cols, AdamConfig cfg)
    : first_moment(rows, cols),
      second_moment(rows, cols),
      beta1(cfg.beta1),
      beta2(cfg.beta2),
      epsilon(cfg.epsilon) {}

Vector dense_forward(std::span<const double> x, const DenseMatrix& weight,
                     std::span<const double> bias) {
    require(x.size() == weight.cols() && bias.size() == weight.rows(),
            "dense_forward: input " + vec_shape(x.size()) + ", weight " +
                weight.shape_string() + ", bias " + vec_shape(bias.size()));
    Vector out(weight.rows());
    for (std::size_t r = 0; r < weight.rows(); ++r) {
        const auto w = weight.row(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < x.size(); ++c) acc += w[c] * x[c];
        out[r] = acc + bias[r];
    }
    return out;
}

Vector relu(std::span<const double> x) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

double l2_norm(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "euclidean_distance: " + vec_shape(a.size()) + " vs " +
                                      vec_shape(b.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

Vector l2_normalize(std::span<const double> x, double floor) {
    const double denom = std::max(l2_norm(x), floor);
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / denom;
    return out;
}

Vector mean_pool(const std::vector<std::span<const double>>& rows) {
    if (rows.empty()) throw EmptyPoolError("mean_pool: no rows");
    const std::size_t n = rows.front().size();
    Vector out(n, 0.0);
    for (const auto& r : rows) {
        require(r.size() == n, "mean_pool: row " + vec_shape(r.size()) + " vs " + vec_shape(n));
        for (std::size_t i = 0; i < n; ++i) out[i] += r[i];
    }
    const double count = static_cast<double>(rows.size());
    for (double& v : out) v /= count;
    return out;
}

Vector mean_pool(const std::vector<Vector>& rows) {
    std::vector<std::span<const double>> views(rows.begin(), rows.end());
    return mean_pool(views);
}

Vector concat(const std::vector<std::span<const double>>& parts) {
    Vector out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

Vector concat(const std::vector<Vector>& parts) {
    std::vector<std::span<const double>> views(parts.begin(), parts.end());
    return concat(views);
}

CrossEntropyResult softmax_cross_entropy(std::span<const double> logits,
                                         std::size_t true_class) {
    if (true_class >= logits.size()) {
        throw IndexError("softmax_cross_entropy: class " + std::to_string(true_class) +
                         " out of range for " + std::to_string(logits.size()) + " logits");
    }
    const double peak = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    Vector probs(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - peak);
        total += probs[i];
    }
    CrossEntropyResult res;
    res.loss = std::log(total) - (logits[true_class] - peak);
    res.grad_logits.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        res.grad_logits[i] = probs[i] / total - (i == true_class ? 1.0 : 0.0);
    }
    return res;
}

Vector dense_backward(std::span<const double> x, const DenseMatrix& weight,
                      std::span<const double> upstream, DenseMatrix& weight_grad,
                      DenseMatrix& bias_grad) {
    require(x.size() == weight.cols() && upstream.size() == weight.rows(),
            "dense_backward: input " + vec_shape(x.size()) + ", upstream " +
                vec_shape(upstream.size()) + ", weight " + weight.shape_string());
    require(weight_grad.rows() == weight.rows() && weight_grad.cols() == weight.cols() &&
                bias_grad.size() == weight.rows(),
            "dense_backward: gradient buffers " + weight_grad.shape_string() + ", " +
                bias_grad.shape_string() + " for weight " + weight.shape_string());
    Vector dx(x.size(), 0.0);
    auto& bg = bias_grad.values();
    for (std::size_t r = 0; r < weight.rows(); ++r) {
        const double g = upstream[r];
        bg[r] += g;
        if (g == 0.0) continue;
        auto wg = weight_grad.row(r);
        const auto w = weight.row(r);
        for (std::size_t c = 0; c < x.size(); ++c) {
            wg[c] += g * x[c];
            dx[c] += g * w[c];
        }
    }
    return dx;
}

Vector relu_backward(std::span<const double> pre_activation,
                     std::span<const double> upstream) {
    require(pre_activation.size() == upstream.size(),
            "relu_backward: recorded " + vec_shape(pre_activation.size()) + ", upstream " +
                vec_shape(upstream.size()));
    Vector dx(upstream.size());
    for (std::size_t i = 0; i < dx.size(); ++i)
        dx[i] = pre_activation[i] > 0.0 ? upstream[i] : 0.0;
    return dx;
}

Vector l2_normalize_backward(std::span<const double> x, std::span<const double> upstream,
                             double floor) {
    require(x.size() == upstream.size(), "l2_normalize_backward: recorded " +
                                             vec_shape(x.size()) + ", upstream " +
                                             vec_shape(upstream.size()));
    const double norm = l2_norm(x);
    Vector dx(x.size());
    if (norm < floor) {
        // constant denominator branch
        for (std::size_t i = 0; i < x.size(); ++i) dx[i] = upstream[i] / floor;
        return dx;
    }
    double proj = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) proj += x[i] * upstream[i];
    proj /= norm * norm;
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = (upstream[i] - x[i] * proj) / norm;
    return dx;
}

Vector mean_pool_backward(std::size_t count, std::span<const double> upstream) {
    if (count == 0) throw EmptyPoolError("mean_pool_backward: no rows");
    Vector dx(upstream.begin(), upstream.end());
    const double n = static_cast<double>(count);
    for (double& v : dx) v /= n;
    return dx;
}

std::vector<Vector> concat_backward(std::span<const std::size_t> part_sizes,
                                    std::span<const double> upstream) {
    std::size_t total = 0;
    for (auto s : part_sizes) total += s;
    require(total == upstream.size(), "concat_backward: parts sum to " +
                                          vec_shape(total) + ", upstream " +
                                          vec_shape(upstream.size()));
    std::vector<Vector> out;
    out.reserve(part_sizes.size());
    std::size_t offset = 0;
    for (auto s : part_sizes) {
        out.emplace_back(upstream.begin() + static_cast<std::ptrdiff_t>(offset),
                         upstream.begin() + static_cast<std::ptrdiff_t>(offset + s));
        offset += s;
    }
    return out;
}

void adam_step(ParamTensor& param, AdamState& state, double lr) {
    if (!param.trainable) throw FrozenParameterError("adam_step: parameter is frozen");
    const auto& v = param.value;
    require(param.grad.rows() == v.rows() && param.grad.cols() == v.cols() &&
                state.first_moment.rows() == v.rows() &&
                state.first_moment.cols() == v.cols() &&
                state.second_moment.rows() == v.rows() &&
                state.second_moment.cols() == v.cols(),
            "adam_step: parameter " + v.shape_string() + ", grad " +
                param.grad.shape_string() + ", moments " +
                state.first_moment.shape_string());

    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);

    auto& w = param.value.values();
    auto& g = param.grad.values();
    auto& m = state.first_moment.values();
    auto& s = state.second_moment.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
        s[i] = state.beta2 * s[i] + (1.0 - state.beta2) * g[i] * g[i];
        const double m_hat = m[i] / c1;
        const double s_hat = s[i] / c2;
        w[i] -= lr * m_hat / (std::sqrt(s_hat) + state.epsilon);
        g[i] = 0.0;
    }
}

double finite_difference_check(const std::function<double(std::span<const double>)>& f,
                               std::span<const double> x, std::span<const double> analytic,
                               double h) {
    require(x.size() == analytic.size(), "finite_difference_check: point " +
                                             vec_shape(x.size()) + ", gradient " +
                                             vec_shape(analytic.size()));
    Vector probe(x.begin(), x.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + h;
        const double up = f(probe);
        probe[i] = orig - h;
        const double down = f(probe);
        probe[i] = orig;
        const double numeric = (up - down) / (2.0 * h);
        const double err = std::abs(analytic[i] - numeric) /
                           std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace cricrep
