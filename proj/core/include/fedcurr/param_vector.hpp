#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "fedcurr/error.hpp"

namespace fedcurr {

/// Flat model parameter vector. The unit of broadcast and aggregation.
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(std::size_t n, double fill = 0.0) : values_(n, fill) {}
    explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}
    ParamVector(std::initializer_list<double> values) : values_(values) {}

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    std::span<double> span() noexcept { return values_; }
    std::span<const double> span() const noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    auto begin() noexcept { return values_.begin(); }
    auto end() noexcept { return values_.end(); }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    bool operator==(const ParamVector&) const = default;

    bool all_finite() const noexcept {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    std::vector<double> values_;
};

namespace vec {

inline void require_same_size(std::size_t a, std::size_t b) {
    if (a != b)
        throw ConfigError("parameter vector length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

/// y += alpha * x
inline void axpy(double alpha, const ParamVector& x, ParamVector& y) {
    require_same_size(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double dot(const ParamVector& a, const ParamVector& b) {
    require_same_size(a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(const ParamVector& a) { return dot(a, a); }

inline ParamVector sub(const ParamVector& a, const ParamVector& b) {
    require_same_size(a.size(), b.size());
    ParamVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline ParamVector scaled(const ParamVector& a, double s) {
    ParamVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
    return out;
}

}  // namespace vec
}  // namespace fedcurr
