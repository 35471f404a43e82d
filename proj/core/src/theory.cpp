#include "fedcurr/theory.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "fedcurr/error.hpp"
#include "fedcurr/format.hpp"
#include "fedcurr/parallel.hpp"

namespace fedcurr::theory {

std::string_view to_string(BiasKind k) noexcept {
    return k == BiasKind::ClientBased ? "client" : "data";
}

BiasKind parse_bias_kind(std::string_view s) {
    if (s == "client") return BiasKind::ClientBased;
    if (s == "data") return BiasKind::DataBased;
    throw ConfigError("unknown bias schedule kind '" + std::string(s) + "'");
}

BiasSchedule make_bias_schedule(BiasKind kind, std::size_t rounds, std::size_t local_steps, double b_start,
                                double b_end) {
    if (!(b_start >= 0.0 && b_start < b_end)) throw ConfigError("bias schedule needs 0 <= B_start < B_end");
    BiasSchedule s{kind, StepTable(rounds, local_steps)};
    const double span = b_end - b_start;
    if (kind == BiasKind::ClientBased) {
        for (std::size_t t = 0; t <= rounds; ++t) {
            const double v = rounds == 0 ? b_start
                                         : b_start + span * static_cast<double>(t) / static_cast<double>(rounds);
            for (std::size_t j = 0; j <= local_steps; ++j) s.values.at(t, j) = v;
        }
        return s;
    }
    if (local_steps == 0) throw ConfigError("data-based bias schedule needs at least two local steps (J >= 1)");
    const double last = static_cast<double>((rounds + 1) * (local_steps + 1) - 1);
    for (std::size_t t = 0; t <= rounds; ++t) {
        for (std::size_t j = 0; j <= local_steps; ++j) {
            if (t > 0 && j == 0) {
                s.values.at(t, 0) = s.values.at(t - 1, local_steps);
            } else {
                const double flat = static_cast<double>(t * (local_steps + 1) + j);
                s.values.at(t, j) = j == local_steps && t == rounds ? b_end : b_start + span * flat / last;
            }
        }
    }
    return s;
}

void check_bias_schedule(const BiasSchedule& s) {
    const std::size_t T = s.values.rounds();
    const std::size_t J = s.values.local_steps();
    for (double v : s.values.values())
        if (!(v >= 0.0)) throw PreconditionError("bias caps must be nonnegative");
    auto fail = [](const std::string& what, std::size_t t, std::size_t j) {
        throw PreconditionError(what + " at (t=" + std::to_string(t) + ", j=" + std::to_string(j) + ")");
    };
    for (std::size_t t = 0; t <= T; ++t) {
        for (std::size_t j = 1; j <= J; ++j) {
            const double prev = s.values.at(t, j - 1);
            const double cur = s.values.at(t, j);
            if (s.kind == BiasKind::ClientBased && cur != prev) fail("client-based caps must be constant in j", t, j);
            if (s.kind == BiasKind::DataBased && !(cur > prev)) fail("data-based caps must increase in j", t, j);
        }
        if (t == 0) continue;
        if (s.kind == BiasKind::ClientBased && !(s.values.at(t, 0) > s.values.at(t - 1, 0)))
            fail("client-based caps must increase in t", t, 0);
        if (s.kind == BiasKind::DataBased && s.values.at(t, 0) != s.values.at(t - 1, J))
            fail("data-based caps must satisfy B(t-1, J) = B(t, 0)", t, 0);
    }
}

BiasSchedule reversed(const BiasSchedule& s) {
    BiasSchedule out = s;
    auto& v = out.values.values();
    std::reverse(v.begin(), v.end());
    return out;
}

StepsizeSchedule constant_stepsize(std::size_t rounds, std::size_t local_steps, double alpha) {
    return StepTable(rounds, local_steps, alpha);
}

StepsizeSchedule diminishing_stepsize(std::size_t rounds, std::size_t local_steps, double alpha0) {
    StepTable s(rounds, local_steps);
    for (std::size_t t = 0; t <= rounds; ++t)
        for (std::size_t j = 0; j <= local_steps; ++j) s.at(t, j) = alpha0 / static_cast<double>(t + 1);
    return s;
}

ConvexProblem ConvexProblem::make(std::size_t dim, double mu, double lipschitz, std::uint64_t seed) {
    if (dim == 0) throw ConfigError("convex problem needs dim >= 1");
    if (!(mu > 0.0) || !(mu <= lipschitz)) throw ConfigError("convex problem needs 0 < mu <= L");
    Rng rng = make_rng(seed, Stream::Problem);
    std::normal_distribution<double> normal(0.0, 1.0);

    const auto n = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = normal(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Eigen::VectorXd eig(n);
    for (Eigen::Index i = 0; i < n; ++i)
        eig(i) = dim == 1 ? mu : mu + (lipschitz - mu) * static_cast<double>(i) / static_cast<double>(dim - 1);
    const Eigen::MatrixXd a = q * eig.asDiagonal() * q.transpose();

    ConvexProblem p;
    p.dim = dim;
    p.mu = mu;
    p.lipschitz = lipschitz;
    p.hessian.resize(dim * dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            // Symmetrize so that A is exactly symmetric in floating point.
            p.hessian[i * dim + j] = 0.5 * (a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +
                                            a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)));
    p.optimum = ParamVector(dim);
    for (std::size_t i = 0; i < dim; ++i) p.optimum[i] = normal(rng);
    return p;
}

ParamVector ConvexProblem::gradient(const ParamVector& x) const {
    const ParamVector d = vec::sub(x, optimum);
    ParamVector g(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < dim; ++j) s += hessian[i * dim + j] * d[j];
        g[i] = s;
    }
    return g;
}

double ConvexProblem::value(const ParamVector& x) const {
    return 0.5 * vec::dot(vec::sub(x, optimum), gradient(x));
}

double NonconvexProblem::value(const ParamVector& x) const {
    double s = offset;
    for (double v : x) s += std::log(std::cosh(v));
    return s;
}

ParamVector NonconvexProblem::gradient(const ParamVector& x) const {
    ParamVector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = std::tanh(x[i]);
    return g;
}

double NonconvexProblem::grad_bound() const { return std::sqrt(static_cast<double>(dim)); }

std::vector<ParamVector> zero_sum_directions(std::size_t cohort, std::size_t dim) {
    if (cohort < 2) throw ConfigError("zero-sum bias needs a cohort of at least 2 clients");
    if (dim == 0) throw ConfigError("zero-sum bias needs dim >= 1");
    if (cohort % 2 == 1 && dim < 2) throw ConfigError("an odd cohort needs dim >= 2 for zero-sum unit biases");
    std::vector<ParamVector> u(cohort, ParamVector(dim));
    // Opposite pairs +e_m, -e_m; an odd cohort ends with three unit vectors at 120 degrees.
    const std::size_t paired = cohort % 2 == 0 ? cohort : cohort - 3;
    for (std::size_t k = 0; k < paired; k += 2) {
        const std::size_t axis = (k / 2) % dim;
        u[k][axis] = 1.0;
        u[k + 1][axis] = -1.0;
    }
    if (paired < cohort) {
        const double h = std::sqrt(3.0) / 2.0;
        u[paired][0] = 1.0;
        u[paired + 1][0] = -0.5;
        u[paired + 1][1] = h;
        u[paired + 2][0] = -0.5;
        u[paired + 2][1] = -h;
    }
    return u;
}

BiasedGradOracle::BiasedGradOracle(GradientFn gradient, std::size_t dim, std::size_t cohort, BiasSchedule bias,
                                   NoiseModel noise)
    : gradient_(std::move(gradient)), dim_(dim), cohort_(cohort), bias_(std::move(bias)), noise_(noise) {
    if (cohort_ < 1) throw ConfigError("cohort must contain at least one client");
    if (!(noise_.relative >= 0.0) || !(noise_.sigma >= 0.0)) throw ConfigError("noise parameters must be nonnegative");
    bool any_bias = false;
    for (double v : bias_.values.values()) {
        if (!(v >= 0.0)) throw ConfigError("bias caps must be nonnegative");
        any_bias = any_bias || v > 0.0;
    }
    if (any_bias) directions_ = zero_sum_directions(cohort_, dim_);
}

ParamVector BiasedGradOracle::bias(std::size_t client, std::size_t t, std::size_t j) const {
    if (client >= cohort_) throw PreconditionError("client outside the current cohort");
    const double cap = bias_.values.at(t, j);
    if (cap == 0.0 || directions_.empty()) return ParamVector(dim_);
    return vec::scaled(directions_[client], std::sqrt(cap));
}

BiasedGradOracle::Sample BiasedGradOracle::sample(std::size_t client, const ParamVector& x, std::size_t t,
                                                  std::size_t j, Rng& rng) const {
    ParamVector g = gradient_(x);
    vec::axpy(1.0, bias(client, t, j), g);
    const double scale_rel = std::sqrt(noise_.relative) * std::sqrt(vec::norm_sq(g));
    const double inv_sqrt_dim = 1.0 / std::sqrt(static_cast<double>(dim_));
    std::normal_distribution<double> normal(0.0, 1.0);
    Sample s{ParamVector(dim_), ParamVector(dim_)};
    for (std::size_t i = 0; i < dim_; ++i) {
        const double z1 = normal(rng) * inv_sqrt_dim;
        const double z2 = normal(rng) * inv_sqrt_dim;
        s.noise[i] = scale_rel * z1 + noise_.sigma * z2;
        s.gradient[i] = g[i] + s.noise[i];
    }
    return s;
}

namespace {

void check_convex_inputs(const ConvexBoundInputs& in) {
    if (!in.problem || !in.stepsizes || !in.bias) throw ConfigError("convex bound inputs are incomplete");
    const auto& a = *in.stepsizes;
    const auto& b = in.bias->values;
    if (a.rounds() != b.rounds() || a.local_steps() != b.local_steps())
        throw ConfigError("stepsize and bias schedules have different shapes");
    if (!(in.problem->mu > 0.0)) throw PreconditionError("strong convexity parameter mu must be positive");
    if (in.cohort < 1) throw ConfigError("cohort must contain at least one client");
    if (in.start.size() != in.problem->dim) throw ConfigError("start point has the wrong dimension");
    const double cap = 1.0 / (4.0 * (3.0 + 2.0 * in.noise.relative) * in.problem->lipschitz);
    for (std::size_t t = 0; t <= a.rounds(); ++t)
        for (std::size_t j = 0; j <= a.local_steps(); ++j) {
            const double alpha = a.at(t, j);
            if (!(alpha >= 0.0) || alpha > cap)
                throw PreconditionError("stepsize precondition violated at (t=" + std::to_string(t) +
                                        ", j=" + std::to_string(j) + "): alpha=" + format_real(alpha) +
                                        " exceeds 1/(4(3+2M)L)=" + format_real(cap));
        }
}

// Welford running mean; exact when every sample is equal.
class RunningMean {
public:
    void add(double x) {
        ++n_;
        mean_ += (x - mean_) / static_cast<double>(n_);
    }
    double mean() const noexcept { return mean_; }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
};

// One averaging round of local SGD; returns the new server point.
ParamVector local_sgd_round(const BiasedGradOracle& oracle, const StepsizeSchedule& alpha, std::size_t t,
                            const ParamVector& server, Rng& rng) {
    const std::size_t q = oracle.cohort();
    ParamVector drift(server.size());
    for (std::size_t k = 0; k < q; ++k) {
        ParamVector x = server;
        for (std::size_t j = 0; j <= alpha.local_steps(); ++j) {
            const auto s = oracle.sample(k, x, t, j, rng);
            vec::axpy(-alpha.at(t, j), s.gradient, x);
        }
        vec::axpy(1.0, vec::sub(x, server), drift);
    }
    ParamVector next = server;
    vec::axpy(1.0 / static_cast<double>(q), drift, next);
    return next;
}

}  // namespace

double bound_convex(const ConvexBoundInputs& in) {
    check_convex_inputs(in);
    const auto& a = *in.stepsizes;
    const auto& b = in.bias->values;
    const double mu = in.problem->mu;
    const double lip = in.problem->lipschitz;
    const double m = in.noise.relative;
    const double sigma = in.noise.sigma;
    const double q = static_cast<double>(in.cohort);

    double contraction = 1.0;
    double noise_terms = 0.0;
    double bias_terms = 0.0;
    for (std::size_t t = 1; t <= a.rounds(); ++t) {
        for (std::size_t j = 0; j <= a.local_steps(); ++j) {
            const double alpha = a.at(t, j);
            const double cap = b.at(t, j);
            contraction *= 1.0 - alpha * mu / 2.0;
            if (in.form == ConvexBoundForm::Corrected)
                noise_terms += 2.0 * alpha * alpha * (lip * (3.0 + 2.0 * m) * cap + 3.0 * sigma * sigma) / q;
            else
                noise_terms += 2.0 * alpha * alpha * lip * ((3.0 + 2.0 * m) * cap + 3.0 * sigma * sigma * sigma) / q;
            bias_terms += 2.0 * alpha * lip * cap * cap / (mu * q);
        }
    }
    const double d0 = vec::norm_sq(vec::sub(in.start, in.problem->optimum));
    return contraction * d0 + noise_terms + bias_terms;
}

double bound_nonconvex(const NonconvexProblem& problem, const StepsizeSchedule& a, std::size_t cohort,
                       const ParamVector& start) {
    if (start.size() != problem.dim) throw ConfigError("start point has the wrong dimension");
    const double lg2 = problem.lipschitz() * problem.grad_bound() * problem.grad_bound();
    double cross = 0.0;
    for (std::size_t t = 0; t <= a.rounds(); ++t) {
        for (std::size_t j = 0; j <= a.local_steps(); ++j) {
            double tail = 0.0;
            for (std::size_t l = j; l <= a.local_steps(); ++l) tail += a.at(t, l);
            cross += a.at(t, j) * (a.at(t, j) + tail);
        }
    }
    return static_cast<double>(cohort) * (problem.value(start) - problem.lower_bound()) + 2.0 * cross * lg2;
}

VerifyReport verify_convex(const ConvexBoundInputs& in, std::size_t runs, std::uint64_t seed, std::size_t threads) {
    if (runs < 100) throw PreconditionError("verify_convex needs at least 100 Monte-Carlo runs");
    VerifyReport report;
    report.bound = bound_convex(in);

    const ConvexProblem& prob = *in.problem;
    const BiasedGradOracle oracle([&prob](const ParamVector& x) { return prob.gradient(x); }, prob.dim, in.cohort,
                                  *in.bias, in.noise);
    std::vector<double> dist(runs);
    parallel_for(runs, threads, [&](std::size_t r) {
        Rng rng = make_rng(seed, Stream::MonteCarlo, {r});
        ParamVector x = in.start;
        for (std::size_t t = 1; t <= in.stepsizes->rounds(); ++t) x = local_sgd_round(oracle, *in.stepsizes, t, x, rng);
        dist[r] = vec::norm_sq(vec::sub(x, prob.optimum));
    });
    RunningMean mean;
    for (double d : dist) mean.add(d);
    report.empirical = mean.mean();
    report.pass = report.empirical <= report.bound;
    return report;
}

VerifyReport verify_nonconvex(const NonconvexProblem& problem, const StepsizeSchedule& a, std::size_t cohort,
                              const ParamVector& start, double sigma, std::size_t runs, std::uint64_t seed,
                              std::size_t threads) {
    if (runs < 1) throw PreconditionError("verify_nonconvex needs at least one run");
    if (start.size() != problem.dim) throw ConfigError("start point has the wrong dimension");
    VerifyReport report;
    report.bound = bound_nonconvex(problem, a, cohort, start);

    const BiasedGradOracle oracle([&problem](const ParamVector& x) { return problem.gradient(x); }, problem.dim,
                                  cohort, BiasSchedule{BiasKind::ClientBased, StepTable(a.rounds(), a.local_steps())},
                                  NoiseModel{0.0, sigma});
    const double multiplicity = static_cast<double>(a.local_steps() + 1);
    std::vector<double> lhs(runs);
    parallel_for(runs, threads, [&](std::size_t r) {
        Rng rng = make_rng(seed, Stream::MonteCarlo, {r});
        ParamVector x = start;
        double sum = 0.0;
        for (std::size_t t = 0; t < a.rounds(); ++t) {
            sum += multiplicity * vec::norm_sq(problem.gradient(x));
            x = local_sgd_round(oracle, a, t, x, rng);
        }
        sum += multiplicity * vec::norm_sq(problem.gradient(x));
        lhs[r] = sum;
    });
    RunningMean mean;
    for (double v : lhs) mean.add(v);
    report.empirical = mean.mean();
    report.pass = report.empirical <= report.bound;
    return report;
}

ParamVector point_at_distance(const ParamVector& center, double distance, std::uint64_t seed) {
    Rng rng = make_rng(seed, Stream::Problem, {1});
    std::normal_distribution<double> normal(0.0, 1.0);
    ParamVector u(center.size());
    double norm = 0.0;
    while (norm == 0.0) {
        for (double& v : u) v = normal(rng);
        norm = std::sqrt(vec::norm_sq(u));
    }
    ParamVector x = center;
    vec::axpy(distance / norm, u, x);
    return x;
}

void write_report_row(std::ostream& os, const ReportRow& row) {
    os << row.case_id << ',' << row.rounds << ',' << row.local_steps << ',' << row.cohort << ',' << row.schedule << ','
       << format_real(row.report.empirical) << ',' << format_real(row.report.bound) << ','
       << format_real(row.report.bound - row.report.empirical) << ',' << (row.report.pass ? "true" : "false") << '\n';
}

}  // namespace fedcurr::theory
