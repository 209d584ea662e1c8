#include "masterop/kernel.hpp"

#include "masterop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace masterop {

namespace {

void require_params(int n, double s) {
    if (!(s > 0.0 && s < 1.0))
        throw DomainError("fractional order s must lie in (0,1), got " + std::to_string(s));
    if (n < 1 || n > 3)
        throw DomainError("spatial dimension must be 1, 2 or 3, got " + std::to_string(n));
}

void require_duration(double dt) {
    if (!(dt > 0.0)) throw DomainError("kernel duration must be positive, got " + std::to_string(dt));
}

} // namespace

double squared_norm(std::span<const double> v) {
    double r = 0.0;
    for (double c : v) r += c * c;
    return r;
}

double unit_sphere_measure(int n) {
    if (n == 1) return 2.0;
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

KernelParams kernel_constants(int n, double s, Normalization mode) {
    require_params(n, s);
    KernelParams p;
    p.n = n;
    p.s = s;
    p.normalization = mode;
    const double pi = std::numbers::pi;
    // Gamma(-s) = Gamma(1-s) / (-s)
    const double abs_gamma_neg_s = std::tgamma(1.0 - s) / s;
    p.c_ns = 1.0 / (std::pow(4.0 * pi, 0.5 * n) * abs_gamma_neg_s);
    p.C_s = s / std::tgamma(1.0 - s);
    p.C_ns_lap = std::pow(4.0, s) * std::tgamma(0.5 * n + s) / (std::pow(pi, 0.5 * n) * abs_gamma_neg_s);
    p.Lambda = fit_lambda(p);
    return p;
}

double log_kernel(std::span<const double> dx, double dt, const KernelParams& p) {
    require_duration(dt);
    return std::log(p.master_constant()) - p.time_power() * std::log(dt) - squared_norm(dx) / (4.0 * dt);
}

KernelValue kernel_eval(std::span<const double> dx, double dt, const KernelParams& p) {
    require_duration(dt);
    const double expo = squared_norm(dx) / (4.0 * dt);
    KernelValue out;
    const double logv = std::log(p.master_constant()) - p.time_power() * std::log(dt) - expo;
    if (!std::isfinite(expo) || logv < -745.0) {
        out.value = 0.0;
        out.underflow = true;
        return out;
    }
    out.value = std::exp(logv);
    return out;
}

DecayCheck kernel_decay_check(std::span<const double> dx, double dt, const KernelParams& p) {
    DecayCheck c;
    c.value = kernel_eval(dx, dt, p).value;
    const double r = std::sqrt(squared_norm(dx));
    c.majorant = p.Lambda / (std::pow(r, p.space_power()) + std::pow(dt, p.time_power()));
    c.pass = c.value <= c.majorant * (1.0 + 1e-12); // equality at dx = 0 when Lambda = c_ns
    return c;
}

double fit_lambda(const KernelParams& p, int points_per_axis, double lo, double hi, double headroom) {
    const double llo = std::log(lo);
    const double step = points_per_axis > 1 ? (std::log(hi) - llo) / (points_per_axis - 1) : 0.0;
    double sup = p.master_constant(); // x = 0 forces Lambda >= constant
    for (int i = 0; i < points_per_axis; ++i) {
        const double r = std::exp(llo + i * step);
        for (int k = 0; k < points_per_axis; ++k) {
            const double t = std::exp(llo + k * step);
            // M * (r^q + t^p) evaluated in log space per term
            const double lk = std::log(p.master_constant()) - p.time_power() * std::log(t) - r * r / (4.0 * t);
            const double v = std::exp(lk + p.space_power() * std::log(r)) + std::exp(lk + p.time_power() * std::log(t));
            sup = std::max(sup, v);
        }
    }
    return sup * (1.0 + headroom);
}

double kernel_log_ratio(std::span<const double> dx1, std::span<const double> dx2, double dt) {
    require_duration(dt);
    return (squared_norm(dx2) - squared_norm(dx1)) / (4.0 * dt);
}

} // namespace masterop
