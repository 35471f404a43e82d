#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fedcurr/param_vector.hpp"
#include "fedcurr/rng.hpp"

namespace fedcurr::theory {

/// Row-major (T+1) x (J+1) table indexed by round t and local step j.
class StepTable {
public:
    StepTable() = default;
    StepTable(std::size_t rounds, std::size_t local_steps, double fill = 0.0)
        : rounds_(rounds), steps_(local_steps), values_((rounds + 1) * (local_steps + 1), fill) {}

    std::size_t rounds() const noexcept { return rounds_; }       // T
    std::size_t local_steps() const noexcept { return steps_; }   // J
    double& at(std::size_t t, std::size_t j) { return values_.at(t * (steps_ + 1) + j); }
    double at(std::size_t t, std::size_t j) const { return values_.at(t * (steps_ + 1) + j); }
    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t rounds_ = 0;
    std::size_t steps_ = 0;
    std::vector<double> values_;
};

enum class BiasKind { ClientBased, DataBased };

std::string_view to_string(BiasKind k) noexcept;
BiasKind parse_bias_kind(std::string_view s);

/// Caps B(t, j) on the squared norm of each client's gradient bias.
struct BiasSchedule {
    BiasKind kind = BiasKind::ClientBased;
    StepTable values;
};

/// ClientBased: B linear in t, constant across j.
/// DataBased: B linear in the flattened index t(J+1)+j, with B(t, 0) tied to B(t-1, J).
BiasSchedule make_bias_schedule(BiasKind kind, std::size_t rounds, std::size_t local_steps, double b_start,
                                double b_end);

/// Throws PreconditionError when the schedule breaks its kind's ordering.
void check_bias_schedule(const BiasSchedule& schedule);

/// Same values in reverse flattened order (large caps first).
BiasSchedule reversed(const BiasSchedule& schedule);

using StepsizeSchedule = StepTable;

StepsizeSchedule constant_stepsize(std::size_t rounds, std::size_t local_steps, double alpha);
/// alpha(t, j) = alpha0 / (t + 1).
StepsizeSchedule diminishing_stepsize(std::size_t rounds, std::size_t local_steps, double alpha0);

/// f(x) = 1/2 (x - x*)^T A (x - x*), spectrum of A spread evenly over [mu, L].
struct ConvexProblem {
    std::size_t dim = 0;
    double mu = 0.0;
    double lipschitz = 0.0;
    std::vector<double> hessian;  // row-major dim x dim
    ParamVector optimum;

    static ConvexProblem make(std::size_t dim, double mu, double lipschitz, std::uint64_t seed);
    double value(const ParamVector& x) const;
    ParamVector gradient(const ParamVector& x) const;
};

/// f(x) = sum_i log cosh(x_i) + offset. |grad f| <= sqrt(dim), grad f is 1-Lipschitz,
/// f >= offset.
struct NonconvexProblem {
    std::size_t dim = 0;
    double offset = 0.0;

    double value(const ParamVector& x) const;
    ParamVector gradient(const ParamVector& x) const;
    double lipschitz() const noexcept { return 1.0; }
    double grad_bound() const;
    double lower_bound() const noexcept { return offset; }
};

/// E|n|^2 <= relative * |grad f + b|^2 + sigma^2.
struct NoiseModel {
    double relative = 0.0;  // M
    double sigma = 0.0;
};

/// Unit vectors u_0..u_{Q-1} in R^dim whose sum is exactly zero.
std::vector<ParamVector> zero_sum_directions(std::size_t cohort, std::size_t dim);

/// Gradient oracle with zero-sum client bias sqrt(B(t,j)) u_k and symmetric noise
/// n = sqrt(M) |grad f + b| z1 + sigma z2, z = N(0, I) / sqrt(dim).
class BiasedGradOracle {
public:
    using GradientFn = std::function<ParamVector(const ParamVector&)>;

    BiasedGradOracle(GradientFn gradient, std::size_t dim, std::size_t cohort, BiasSchedule bias, NoiseModel noise);

    std::size_t cohort() const noexcept { return cohort_; }
    ParamVector bias(std::size_t client, std::size_t t, std::size_t j) const;

    struct Sample {
        ParamVector gradient;  // grad f + b + n
        ParamVector noise;     // n
    };
    Sample sample(std::size_t client, const ParamVector& x, std::size_t t, std::size_t j, Rng& rng) const;

private:
    GradientFn gradient_;
    std::size_t dim_;
    std::size_t cohort_;
    BiasSchedule bias_;
    NoiseModel noise_;
    std::vector<ParamVector> directions_;
};

/// Noise term of the strongly convex bound. Corrected: 2 a^2 [L (3+2M) B + 3 sigma^2] / Q.
/// AsPrinted keeps the literal variant: 2 a^2 L ((3+2M) B + 3 sigma^3) / Q.
enum class ConvexBoundForm { Corrected, AsPrinted };

struct ConvexBoundInputs {
    const ConvexProblem* problem = nullptr;
    const StepsizeSchedule* stepsizes = nullptr;
    const BiasSchedule* bias = nullptr;
    NoiseModel noise;
    std::size_t cohort = 1;  // Q
    ParamVector start;
    ConvexBoundForm form = ConvexBoundForm::Corrected;
};

/// Upper bound on E|x(T,0) - x*|^2 over rounds t = 1..T, steps j = 0..J:
///   prod (1 - a mu / 2) |x0 - x*|^2 + sum 2 a^2 [L (3+2M) B + 3 s^2] / Q
///   + sum 2 a L B^2 / (mu Q).
/// Throws PreconditionError naming the first (t, j) with a > 1 / (4 (3+2M) L).
double bound_convex(const ConvexBoundInputs& in);

/// Q (f(x0) - f_*) + 2 sum_{t=0..T} sum_{j=0..J} a(t,j) (a(t,j) + sum_{l=j..J} a(t,l)) L G^2.
double bound_nonconvex(const NonconvexProblem& problem, const StepsizeSchedule& stepsizes, std::size_t cohort,
                       const ParamVector& start);

struct VerifyReport {
    double empirical = 0.0;
    double bound = 0.0;
    bool pass = false;
};

/// Monte-Carlo local SGD over a cohort of Q clients with full participation; round r
/// (r = 1..T) uses row r of the schedules. pass <=> mean |x(T,0) - x*|^2 <= bound.
VerifyReport verify_convex(const ConvexBoundInputs& in, std::size_t runs, std::uint64_t seed,
                           std::size_t threads = 1);

/// Round t (t = 0..T-1) uses row t. The empirical side is
/// sum_{t=0..T} (J+1) |grad f(x(t,0))|^2, averaged over runs. Additive noise only.
VerifyReport verify_nonconvex(const NonconvexProblem& problem, const StepsizeSchedule& stepsizes, std::size_t cohort,
                              const ParamVector& start, double sigma, std::size_t runs, std::uint64_t seed,
                              std::size_t threads = 1);

/// x* + distance * u for a seeded random unit vector u.
ParamVector point_at_distance(const ParamVector& center, double distance, std::uint64_t seed);

struct ReportRow {
    std::string case_id;
    std::size_t rounds = 0;
    std::size_t local_steps = 0;
    std::size_t cohort = 0;
    std::string schedule;
    VerifyReport report;
};

inline constexpr const char* kReportHeader = "case,T,J,Q,schedule,empirical,bound,slack,pass";
void write_report_row(std::ostream& os, const ReportRow& row);

}  // namespace fedcurr::theory
