#pragma once

// Test functions with hand-written metadata.

#include "masterop/function.hpp"

#include <cmath>
#include <limits>

namespace fx {

using masterop::Dependence;
using masterop::FunctionHandle;
using masterop::SupportBox;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// e^{lambda t} cos(xi x1)
inline FunctionHandle exp_cos(double lambda, double xi, int n = 1) {
    FunctionHandle h;
    h.dim = n;
    h.evaluator = [lambda, xi](std::span<const double> x, double t) { return std::exp(lambda * t) * std::cos(xi * x[0]); };
    h.growth_envelope = "exponential in t";
    if (xi > 1.0) h.feature_length = 1.0 / xi;
    if (lambda > 1.0) h.feature_time = 1.0 / lambda;
    return h;
}

inline FunctionHandle cos_x(int n = 1) {
    FunctionHandle h;
    h.dim = n;
    h.dependence = Dependence::SpaceOnly;
    h.feature_time = kInf;
    h.evaluator = [](std::span<const double> x, double) { return std::cos(x[0]); };
    return h;
}

inline FunctionHandle exp_t(int n = 1) {
    FunctionHandle h;
    h.dim = n;
    h.dependence = Dependence::TimeOnly;
    h.evaluator = [](std::span<const double>, double t) { return std::exp(t); };
    return h;
}

/// (t_+)^2
inline FunctionHandle pos_sq_t() {
    FunctionHandle h;
    h.dim = 1;
    h.dependence = Dependence::TimeOnly;
    h.support = SupportBox{kInf, 0.0, kInf};
    h.time_breaks = {0.0};
    h.c1_limited_in_time = true;
    h.evaluator = [](std::span<const double>, double t) { return t > 0.0 ? t * t : 0.0; };
    return h;
}

/// exp(-1/(1-r^2)) in |x - c| / radius times cos(omega t); spatially compact.
inline FunctionHandle bump_st(int n, double center, double radius, double omega) {
    FunctionHandle h;
    h.dim = n;
    h.evaluator = [center, radius, omega](std::span<const double> x, double t) {
        double q = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double d = x[k] - (k == 0 ? center : 0.0);
            q += d * d;
        }
        const double r2 = q / (radius * radius);
        return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) * std::cos(omega * t) : 0.0;
    };
    h.support = SupportBox{std::abs(center) + radius, -kInf, kInf};
    h.feature_length = radius / 4.0;
    if (omega > 1.0) h.feature_time = 1.0 / omega;
    return h;
}

/// u(x - x0, t - t0) for a 1-d handle, metadata carried along.
inline FunctionHandle shifted(const FunctionHandle& u, double x0, double t0) {
    FunctionHandle h = u;
    h.evaluator = [f = u.evaluator, x0, t0](std::span<const double> x, double t) {
        double y[3];
        for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] - (k == 0 ? x0 : 0.0);
        return f(std::span<const double>(y, x.size()), t - t0);
    };
    if (h.support) h.support->radius += std::abs(x0);
    return h;
}

} // namespace fx
