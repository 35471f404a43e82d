#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedcurr/param_vector.hpp"
#include "fedcurr/rng.hpp"

namespace fedcurr {

enum class ModelKind { LinearRegression, SoftmaxRegression, MlpTanh };

/// Architecture of one of the small hand-differentiated models.
///
/// Parameter layouts (all row-major):
///   LinearRegression  [w (d), b]                         squared error
///   SoftmaxRegression [W (C x d), b (C)]                 cross-entropy
///   MlpTanh           [W1 (h x d), b1 (h), W2 (o x h), b2 (o)]
///                     o = C and cross-entropy when C >= 2,
///                     o = 1 and squared error when C <= 1.
struct ModelSpec {
    ModelKind kind = ModelKind::SoftmaxRegression;
    std::size_t input_dim = 0;
    std::size_t num_classes = 2;
    std::size_t hidden_dim = 0;

    std::size_t output_dim() const noexcept;
    std::size_t param_count() const noexcept;
    bool is_classifier() const noexcept;

    void validate() const;  // throws ConfigError
};

/// Row-major samples. Regression models read `targets` when present and fall back
/// to the integer labels otherwise.
struct SampleBatch {
    std::size_t dim = 0;
    std::vector<double> features;
    std::vector<int> labels;
    std::vector<double> targets;

    std::size_t size() const noexcept { return labels.size(); }
    bool empty() const noexcept { return labels.empty(); }
    std::span<const double> row(std::size_t i) const noexcept {
        return {features.data() + i * dim, dim};
    }
    double target(std::size_t i) const noexcept {
        return targets.empty() ? static_cast<double>(labels[i]) : targets[i];
    }

    /// Copy of the given rows, in the given order.
    SampleBatch subset(std::span<const std::size_t> rows) const;
};

/// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias of a layer.
ParamVector init_params(const ModelSpec& spec, Rng& rng);

std::vector<double> per_sample_losses(const ModelSpec& spec, const ParamVector& params,
                                      const SampleBatch& batch);
std::vector<double> per_sample_losses(const ModelSpec& spec, const ParamVector& params,
                                      const SampleBatch& batch, std::span<const std::size_t> rows);

/// Mean of per-sample losses. Summation order is the same as in `grad`.
double batch_loss(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch);

/// Gradient of the mean batch loss.
ParamVector grad(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch);
ParamVector grad(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch,
                 std::span<const std::size_t> rows);

/// Argmax class per sample (classifiers only).
std::vector<int> predict(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch);

struct Evaluation {
    double accuracy = 0.0;
    double loss = 0.0;
};
Evaluation evaluate(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch);

/// SGD with momentum, weight decay and the per-round decaying learning rate
/// eta(i) = eta0 * (1 + decay_alpha * i)^(-decay_b).
struct SgdHyper {
    double eta0 = 0.001;
    double decay_alpha = 0.001;
    double decay_b = 0.75;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    std::size_t batch_size = 10;

    double learning_rate(std::size_t step_index) const;
    void validate() const;
};

struct SgdStepResult {
    ParamVector params;
    ParamVector momentum;
};

/// v <- rho * v + (g + omega * theta);  theta <- theta - eta(step_index) * v.
SgdStepResult sgd_step(const ParamVector& params, const ParamVector& gradient, const SgdHyper& hyper,
                       std::size_t step_index, const ParamVector& momentum_state);

/// In-place variant used by the training loops.
void sgd_step_inplace(ParamVector& params, const ParamVector& gradient, const SgdHyper& hyper,
                      std::size_t step_index, ParamVector& momentum_state);

/// Dense symmetric matrix, row-major.
struct SymMatrix {
    std::size_t n = 0;
    std::vector<double> data;

    explicit SymMatrix(std::size_t size = 0) : n(size), data(size * size, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) noexcept { return data[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data[i * n + j]; }
    double min_eigenvalue() const;
};

/// Least-squares Hessian split into the Gauss-Newton part (1/N) sum grad_f grad_f^T
/// and the residual part (1/N) sum hess_f (f - y).
struct HessianDecomposition {
    SymMatrix gauss_newton;
    SymMatrix residual_term;
    SymMatrix full;
    double min_eig_full = 0.0;
    double min_eig_gn = 0.0;
};

inline constexpr std::size_t kMaxHessianParams = 512;

/// LinearRegression or squared-error MlpTanh (num_classes <= 1) only.
HessianDecomposition hessian_decomposition(const ModelSpec& spec, const ParamVector& params,
                                           const SampleBatch& batch);

}  // namespace fedcurr
