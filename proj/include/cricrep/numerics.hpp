#pragma once

// Small dense-layer engine: matrices, per-layer forward/backward, Adam.
// Everything is double precision; vectors are plain std::vector<double>.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cricrep/errors.hpp"

namespace cricrep {

using Vector = std::vector<double>;

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return values_.size(); }

    double& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const {
        return {values_.data() + r * cols_, cols_};
    }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    void fill(double v);
    bool all_finite() const;
    std::string shape_string() const;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// A learnable tensor plus its gradient buffer. Frozen tensors still
/// receive gradients but the optimizer refuses to touch them.
struct ParamTensor {
    DenseMatrix value;
    DenseMatrix grad;
    bool trainable = true;

    ParamTensor() = default;
    explicit ParamTensor(DenseMatrix v, bool trainable_flag = true);

    void zero_grad() { grad.fill(0.0); }
};

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    DenseMatrix first_moment;
    DenseMatrix second_moment;
    std::size_t step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState() = default;
    AdamState(std::size_t rows, std::size_t cols, AdamConfig cfg = {});
};

// Forward ops.
Vector dense_forward(std::span<const double> x, const DenseMatrix& weight,
                     std::span<const double> bias);
Vector relu(std::span<const double> x);
Vector l2_normalize(std::span<const double> x, double floor = 1e-8);
Vector mean_pool(const std::vector<std::span<const double>>& rows);
Vector mean_pool(const std::vector<Vector>& rows);
Vector concat(const std::vector<std::span<const double>>& parts);
Vector concat(const std::vector<Vector>& parts);

double l2_norm(std::span<const double> x);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

struct CrossEntropyResult {
    double loss = 0.0;
    Vector grad_logits;
};

CrossEntropyResult softmax_cross_entropy(std::span<const double> logits,
                                         std::size_t true_class);

// Backward ops. Each takes the inputs recorded during the forward pass and
// the upstream gradient. Parameter gradients are accumulated, never reset.
Vector dense_backward(std::span<const double> x, const DenseMatrix& weight,
                      std::span<const double> upstream, DenseMatrix& weight_grad,
                      DenseMatrix& bias_grad);
Vector relu_backward(std::span<const double> pre_activation,
                     std::span<const double> upstream);
Vector l2_normalize_backward(std::span<const double> x,
                             std::span<const double> upstream, double floor = 1e-8);
/// Gradient for each of `count` pooled rows; all rows receive upstream/count.
Vector mean_pool_backward(std::size_t count, std::span<const double> upstream);
std::vector<Vector> concat_backward(std::span<const std::size_t> part_sizes,
                                    std::span<const double> upstream);

/// Adam with bias correction. Zeroes the gradient buffer afterwards.
void adam_step(ParamTensor& param, AdamState& state, double lr);

/// Max relative error between `analytic` and central differences of `f`
/// around `x`, using |a - n| / max(1e-8, |a| + |n|).
double finite_difference_check(const std::function<double(std::span<const double>)>& f,
                               std::span<const double> x,
                               std::span<const double> analytic, double h = 1e-5);

}  // namespace cricrep
