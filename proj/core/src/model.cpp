#include "fedcurr/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedcurr/error.hpp"

namespace fedcurr {

std::size_t ModelSpec::output_dim() const noexcept {
    switch (kind) {
        case ModelKind::LinearRegression: return 1;
        case ModelKind::SoftmaxRegression: return num_classes;
        case ModelKind::MlpTanh: return num_classes >= 2 ? num_classes : 1;
    }
    return 0;
}

std::size_t ModelSpec::param_count() const noexcept {
    const std::size_t d = input_dim;
    switch (kind) {
        case ModelKind::LinearRegression: return d + 1;
        case ModelKind::SoftmaxRegression: return num_classes * (d + 1);
        case ModelKind::MlpTanh: return hidden_dim * (d + 1) + output_dim() * (hidden_dim + 1);
    }
    return 0;
}

bool ModelSpec::is_classifier() const noexcept {
    return kind == ModelKind::SoftmaxRegression || (kind == ModelKind::MlpTanh && num_classes >= 2);
}

void ModelSpec::validate() const {
    if (input_dim == 0) throw ConfigError("model input_dim must be positive");
    if (kind == ModelKind::SoftmaxRegression && num_classes < 2)
        throw ConfigError("softmax regression needs at least 2 classes");
    if (kind == ModelKind::MlpTanh && hidden_dim == 0)
        throw ConfigError("mlp hidden_dim must be positive");
}

SampleBatch SampleBatch::subset(std::span<const std::size_t> rows) const {
    SampleBatch out;
    out.dim = dim;
    out.features.reserve(rows.size() * dim);
    out.labels.reserve(rows.size());
    if (!targets.empty()) out.targets.reserve(rows.size());
    for (std::size_t r : rows) {
        auto x = row(r);
        out.features.insert(out.features.end(), x.begin(), x.end());
        out.labels.push_back(labels[r]);
        if (!targets.empty()) out.targets.push_back(targets[r]);
    }
    return out;
}

namespace {

void check_inputs(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch) {
    spec.validate();
    if (batch.empty()) throw ConfigError("empty sample batch");
    if (batch.dim != spec.input_dim)
        throw ConfigError("feature dimension " + std::to_string(batch.dim) + " does not match model input_dim " +
                          std::to_string(spec.input_dim));
    if (params.size() != spec.param_count())
        throw ConfigError("parameter length " + std::to_string(params.size()) + " does not match model (" +
                          std::to_string(spec.param_count()) + ")");
    if (spec.is_classifier()) {
        for (int y : batch.labels)
            if (y < 0 || static_cast<std::size_t>(y) >= spec.num_classes)
                throw ConfigError("label " + std::to_string(y) + " out of range for model");
    }
}

// Scratch buffers for one forward/backward pass; reused across samples.
struct Workspace {
    std::vector<double> hidden;  // tanh activations (MLP)
    std::vector<double> out;     // logits or scalar prediction
    std::vector<double> dout;
    std::vector<double> dhidden;

    explicit Workspace(const ModelSpec& spec)
        : hidden(spec.hidden_dim), out(spec.output_dim()), dout(spec.output_dim()), dhidden(spec.hidden_dim) {}
};

void affine(std::span<const double> weights, std::span<const double> bias, std::span<const double> x,
            std::span<double> y) {
    const std::size_t in = x.size();
    for (std::size_t o = 0; o < y.size(); ++o) {
        double s = bias[o];
        const double* w = weights.data() + o * in;
        for (std::size_t k = 0; k < in; ++k) s += w[k] * x[k];
        y[o] = s;
    }
}

void forward(const ModelSpec& spec, std::span<const double> p, std::span<const double> x, Workspace& ws) {
    const std::size_t d = spec.input_dim;
    const std::size_t o = spec.output_dim();
    if (spec.kind == ModelKind::MlpTanh) {
        const std::size_t h = spec.hidden_dim;
        affine(p.subspan(0, h * d), p.subspan(h * d, h), x, ws.hidden);
        for (double& a : ws.hidden) a = std::tanh(a);
        const std::size_t off = h * (d + 1);
        affine(p.subspan(off, o * h), p.subspan(off + o * h, o), ws.hidden, ws.out);
    } else {
        affine(p.subspan(0, o * d), p.subspan(o * d, o), x, ws.out);
    }
}

// Loss of the current forward pass; fills ws.dout with dloss/dout.
double loss_and_dout(const ModelSpec& spec, double target, int label, Workspace& ws) {
    if (!spec.is_classifier()) {
        const double r = ws.out[0] - target;
        ws.dout[0] = r;
        return 0.5 * r * r;
    }
    const double zmax = *std::max_element(ws.out.begin(), ws.out.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < ws.out.size(); ++c) {
        ws.dout[c] = std::exp(ws.out[c] - zmax);
        sum += ws.dout[c];
    }
    const double lse = zmax + std::log(sum);
    for (double& g : ws.dout) g /= sum;
    ws.dout[static_cast<std::size_t>(label)] -= 1.0;
    return lse - ws.out[static_cast<std::size_t>(label)];
}

// Accumulates scale * dloss/dparams into g.
void backward(const ModelSpec& spec, std::span<const double> p, std::span<const double> x, Workspace& ws,
              double scale, std::span<double> g) {
    const std::size_t d = spec.input_dim;
    const std::size_t o = spec.output_dim();
    if (spec.kind != ModelKind::MlpTanh) {
        for (std::size_t c = 0; c < o; ++c) {
            const double gc = scale * ws.dout[c];
            double* gw = g.data() + c * d;
            for (std::size_t k = 0; k < d; ++k) gw[k] += gc * x[k];
            g[o * d + c] += gc;
        }
        return;
    }
    const std::size_t h = spec.hidden_dim;
    const std::size_t off = h * (d + 1);
    std::fill(ws.dhidden.begin(), ws.dhidden.end(), 0.0);
    for (std::size_t c = 0; c < o; ++c) {
        const double gc = scale * ws.dout[c];
        const double* w2 = p.data() + off + c * h;
        double* gw2 = g.data() + off + c * h;
        for (std::size_t i = 0; i < h; ++i) {
            gw2[i] += gc * ws.hidden[i];
            ws.dhidden[i] += gc * w2[i];
        }
        g[off + o * h + c] += gc;
    }
    for (std::size_t i = 0; i < h; ++i) {
        const double dz = ws.dhidden[i] * (1.0 - ws.hidden[i] * ws.hidden[i]);
        double* gw1 = g.data() + i * d;
        for (std::size_t k = 0; k < d; ++k) gw1[k] += dz * x[k];
        g[h * d + i] += dz;
    }
}

template <typename RowFn>
std::vector<double> losses_impl(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch,
                                std::size_t n, RowFn row_of) {
    Workspace ws(spec);
    std::vector<double> out(n);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t r = row_of(s);
        forward(spec, params.span(), batch.row(r), ws);
        out[s] = loss_and_dout(spec, batch.target(r), batch.labels[r], ws);
    }
    return out;
}

template <typename RowFn>
ParamVector grad_impl(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch, std::size_t n,
                      RowFn row_of) {
    Workspace ws(spec);
    ParamVector g(params.size());
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t r = row_of(s);
        forward(spec, params.span(), batch.row(r), ws);
        loss_and_dout(spec, batch.target(r), batch.labels[r], ws);
        backward(spec, params.span(), batch.row(r), ws, scale, g.span());
    }
    return g;
}

void check_rows(const SampleBatch& batch, std::span<const std::size_t> rows) {
    if (rows.empty()) throw ConfigError("empty sample batch");
    for (std::size_t r : rows)
        if (r >= batch.size()) throw ConfigError("row index out of range");
}

}  // namespace

ParamVector init_params(const ModelSpec& spec, Rng& rng) {
    spec.validate();
    ParamVector p(spec.param_count());
    auto fill = [&](std::size_t begin, std::size_t count, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (std::size_t i = begin; i < begin + count; ++i) p[i] = u(rng);
    };
    const std::size_t d = spec.input_dim;
    const std::size_t o = spec.output_dim();
    if (spec.kind == ModelKind::MlpTanh) {
        const std::size_t h = spec.hidden_dim;
        fill(0, h * (d + 1), d);
        fill(h * (d + 1), o * (h + 1), h);
    } else {
        fill(0, o * (d + 1), d);
    }
    return p;
}

std::vector<double> per_sample_losses(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch) {
    check_inputs(spec, params, batch);
    return losses_impl(spec, params, batch, batch.size(), [](std::size_t s) { return s; });
}

std::vector<double> per_sample_losses(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch,
                                      std::span<const std::size_t> rows) {
    check_inputs(spec, params, batch);
    check_rows(batch, rows);
    return losses_impl(spec, params, batch, rows.size(), [rows](std::size_t s) { return rows[s]; });
}

double batch_loss(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch) {
    const auto losses = per_sample_losses(spec, params, batch);
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

ParamVector grad(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch) {
    check_inputs(spec, params, batch);
    return grad_impl(spec, params, batch, batch.size(), [](std::size_t s) { return s; });
}

ParamVector grad(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch,
                 std::span<const std::size_t> rows) {
    check_inputs(spec, params, batch);
    check_rows(batch, rows);
    return grad_impl(spec, params, batch, rows.size(), [rows](std::size_t s) { return rows[s]; });
}

std::vector<int> predict(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch) {
    check_inputs(spec, params, batch);
    if (!spec.is_classifier()) throw ConfigError("predict requires a classifier model");
    Workspace ws(spec);
    std::vector<int> out(batch.size());
    for (std::size_t r = 0; r < batch.size(); ++r) {
        forward(spec, params.span(), batch.row(r), ws);
        out[r] = static_cast<int>(std::max_element(ws.out.begin(), ws.out.end()) - ws.out.begin());
    }
    return out;
}

Evaluation evaluate(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch) {
    Evaluation e;
    const auto losses = per_sample_losses(spec, params, batch);
    e.loss = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
    if (spec.is_classifier()) {
        const auto pred = predict(spec, params, batch);
        std::size_t correct = 0;
        for (std::size_t r = 0; r < pred.size(); ++r) correct += pred[r] == batch.labels[r] ? 1 : 0;
        e.accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());
    }
    return e;
}

double SgdHyper::learning_rate(std::size_t step_index) const {
    return eta0 * std::pow(1.0 + decay_alpha * static_cast<double>(step_index), -decay_b);
}

void SgdHyper::validate() const {
    if (!(eta0 >= 0.0)) throw ConfigError("eta0 must be nonnegative");
    if (!(decay_alpha >= 0.0)) throw ConfigError("decay_alpha must be nonnegative");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be nonnegative");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
}

void sgd_step_inplace(ParamVector& params, const ParamVector& gradient, const SgdHyper& hyper,
                      std::size_t step_index, ParamVector& momentum_state) {
    vec::require_same_size(params.size(), gradient.size());
    vec::require_same_size(params.size(), momentum_state.size());
    const double eta = hyper.learning_rate(step_index);
    for (std::size_t i = 0; i < params.size(); ++i) {
        momentum_state[i] = hyper.momentum * momentum_state[i] + (gradient[i] + hyper.weight_decay * params[i]);
        params[i] -= eta * momentum_state[i];
    }
}

SgdStepResult sgd_step(const ParamVector& params, const ParamVector& gradient, const SgdHyper& hyper,
                       std::size_t step_index, const ParamVector& momentum_state) {
    SgdStepResult r{params, momentum_state};
    sgd_step_inplace(r.params, gradient, hyper, step_index, r.momentum);
    return r;
}

double SymMatrix::min_eigenvalue() const {
    if (n == 0) return 0.0;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(data.data(),
                                                                                              static_cast<Eigen::Index>(n),
                                                                                              static_cast<Eigen::Index>(n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

namespace {

// Gradient and Hessian of the scalar model output f(theta, x) for one sample.
void output_derivatives(const ModelSpec& spec, std::span<const double> p, std::span<const double> x,
                        std::vector<double>& grad_f, SymMatrix& hess_f, double& f) {
    const std::size_t d = spec.input_dim;
    std::fill(grad_f.begin(), grad_f.end(), 0.0);
    std::fill(hess_f.data.begin(), hess_f.data.end(), 0.0);
    if (spec.kind == ModelKind::LinearRegression) {
        f = p[d];
        for (std::size_t k = 0; k < d; ++k) {
            f += p[k] * x[k];
            grad_f[k] = x[k];
        }
        grad_f[d] = 1.0;
        return;
    }
    // Scalar-output tanh MLP; b1_i is treated as the weight of a constant input 1.
    const std::size_t h = spec.hidden_dim;
    const std::size_t w2 = h * (d + 1);
    const std::size_t b2 = w2 + h;
    auto in_index = [&](std::size_t i, std::size_t k) { return k < d ? i * d + k : h * d + i; };
    auto in_value = [&](std::size_t k) { return k < d ? x[k] : 1.0; };

    f = p[b2];
    for (std::size_t i = 0; i < h; ++i) {
        double z = p[h * d + i];
        for (std::size_t k = 0; k < d; ++k) z += p[i * d + k] * x[k];
        const double a = std::tanh(z);
        const double s = 1.0 - a * a;
        const double v = p[w2 + i];
        f += v * a;

        grad_f[w2 + i] = a;
        const double curv = v * (-2.0 * a * s);
        for (std::size_t k = 0; k <= d; ++k) {
            const std::size_t ik = in_index(i, k);
            grad_f[ik] = v * s * in_value(k);
            for (std::size_t l = 0; l <= d; ++l) hess_f(ik, in_index(i, l)) = curv * in_value(k) * in_value(l);
            hess_f(ik, w2 + i) = s * in_value(k);
            hess_f(w2 + i, ik) = s * in_value(k);
        }
    }
    grad_f[b2] = 1.0;
}

}  // namespace

HessianDecomposition hessian_decomposition(const ModelSpec& spec, const ParamVector& params, const SampleBatch& batch) {
    const bool least_squares = spec.kind == ModelKind::LinearRegression ||
                               (spec.kind == ModelKind::MlpTanh && spec.num_classes <= 1);
    if (!least_squares)
        throw ConfigError("hessian decomposition requires a squared-error model (linear or scalar-output mlp)");
    check_inputs(spec, params, batch);
    const std::size_t p = spec.param_count();
    if (p > kMaxHessianParams)
        throw ConfigError("hessian decomposition limited to " + std::to_string(kMaxHessianParams) + " parameters");

    HessianDecomposition out{SymMatrix(p), SymMatrix(p), SymMatrix(p)};
    std::vector<double> gf(p);
    SymMatrix hf(p);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (std::size_t r = 0; r < batch.size(); ++r) {
        double f = 0.0;
        output_derivatives(spec, params.span(), batch.row(r), gf, hf, f);
        const double residual = f - batch.target(r);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                out.gauss_newton(i, j) += inv_n * gf[i] * gf[j];
                out.residual_term(i, j) += inv_n * hf(i, j) * residual;
            }
        }
    }
    for (std::size_t i = 0; i < p * p; ++i) out.full.data[i] = out.gauss_newton.data[i] + out.residual_term.data[i];
    out.min_eig_full = out.full.min_eigenvalue();
    out.min_eig_gn = out.gauss_newton.min_eigenvalue();
    return out;
}

}  // namespace fedcurr
