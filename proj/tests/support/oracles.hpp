#pragma once

// Reference computations used to check the library from the outside. Everything
// here is written directly from the defining formulas, without calling the code
// under test except for the scalar objective being differentiated.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "fedcurr/curriculum.hpp"
#include "fedcurr/param_vector.hpp"

namespace fedcurr::oracle {

/// Central differences of a scalar function.
inline ParamVector fd_gradient(const std::function<double(const ParamVector&)>& f, const ParamVector& x,
                               double h = 1e-5) {
    ParamVector g(x.size());
    ParamVector p = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = p[i];
        p[i] = xi + h;
        const double up = f(p);
        p[i] = xi - h;
        const double down = f(p);
        p[i] = xi;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// Central differences of a vector function: J(i, j) = d g_j / d x_i, row-major.
inline std::vector<double> fd_jacobian(const std::function<ParamVector(const ParamVector&)>& g, const ParamVector& x,
                                       double h = 1e-5) {
    const std::size_t n = x.size();
    std::vector<double> jac(n * n);
    ParamVector p = x;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = p[i];
        p[i] = xi + h;
        const ParamVector up = g(p);
        p[i] = xi - h;
        const ParamVector down = g(p);
        p[i] = xi;
        for (std::size_t j = 0; j < n; ++j) jac[i * n + j] = (up[j] - down[j]) / (2.0 * h);
    }
    return jac;
}

inline double relative_error(const ParamVector& a, const ParamVector& b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-8});
}

/// Pacing family formulas evaluated in long double, before rounding and clamping.
inline long double pacing_formula(PacingFamily family, double a, double b, std::size_t n, std::size_t budget,
                                  std::size_t t) {
    // a*T is formed in double so a decimal a such as 0.1 lands on the intended integer.
    const long double N = n, B = b, at = a * static_cast<double>(budget), tt = t;
    switch (family) {
        case PacingFamily::Exponential:
            return N * B + N * (1 - B) * (std::exp(10.0L * tt / at) - 1) / (std::exp(10.0L) - 1);
        case PacingFamily::Step: return N * B + N * std::floor(tt / at);
        case PacingFamily::Linear: return N * B + N * (1 - B) * tt / at;
        case PacingFamily::Quadratic: return N * B + N * (1 - B) * tt * tt / (at * at);
        case PacingFamily::Sqrt: return N * B + N * (1 - B) * std::sqrt(tt) / std::sqrt(at);
    }
    return 0;
}

inline std::size_t pacing_oracle(PacingFamily family, double a, double b, std::size_t n, std::size_t budget,
                                 std::size_t t) {
    if (static_cast<double>(t) >= a * static_cast<double>(budget)) return n;
    const long double lo = std::max<long double>(1, std::llround(static_cast<long double>(n) * b));
    const long double v = std::llround(pacing_formula(family, a, b, n, budget, t));
    return static_cast<std::size_t>(std::clamp<long double>(v, lo, n));
}

/// Indices of the `count` largest (or smallest) scores, ties to the lower index.
inline std::vector<std::size_t> top_k(const std::vector<double>& s, std::size_t count, bool largest) {
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t x, std::size_t y) { return largest ? s[x] > s[y] : s[x] < s[y]; });
    idx.resize(count);
    return idx;
}

}  // namespace fedcurr::oracle
