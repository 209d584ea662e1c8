#include "masterop/operators.hpp"

#include "masterop/errors.hpp"

#include <cmath>
#include <string>

namespace masterop {

QuadResult master_op(const FunctionHandle& u, const SpaceTimePoint& at, const KernelParams& p, const QuadSpec& q) {
    return integrate_difference(u, at, p, q);
}

QuadResult fractional_laplacian(const FunctionHandle& u, std::span<const double> x, const KernelParams& p,
                                const QuadSpec& q, LaplacianRoute route) {
    if (u.dependence == Dependence::TimeOnly || u.dependence == Dependence::SpaceTime)
        throw DomainError("fractional_laplacian needs a function of x only");
    if (static_cast<int>(x.size()) != p.n) throw DomainError("point dimension does not match the kernel dimension");
    if (route == LaplacianRoute::Direct) return integrate_radial_difference(u, x, p.laplacian_constant(), p.s, q);

    // The normalized master operator of a time-constant function is the normalized fractional Laplacian.
    KernelParams pn = p;
    pn.normalization = Normalization::Normalized;
    QuadResult r = integrate_difference(u, SpaceTimePoint{std::vector<double>(x.begin(), x.end()), 0.0}, pn, q);
    if (p.normalization == Normalization::Raw) {
        r.value /= p.C_ns_lap;
        r.err_estimate /= p.C_ns_lap;
        for (auto& pc : r.panels) pc.value /= p.C_ns_lap;
    }
    return r;
}

QuadResult marchaud(const FunctionHandle& u, double t, const KernelParams& p, const QuadSpec& q) {
    if (u.dependence == Dependence::SpaceOnly || u.dependence == Dependence::SpaceTime)
        throw DomainError("marchaud needs a function of t only");
    return integrate_time_difference(u, t, p.marchaud_constant(), p.s, q);
}

DecompositionResult difference_decomposition(const FunctionHandle& u, const FunctionHandle& ui,
                                             const SpaceTimePoint& at, double R, const KernelParams& p,
                                             const QuadSpec& q) {
    const double xn = std::sqrt(squared_norm(at.x));
    const double bound = 3.0 * std::max(std::sqrt(std::abs(at.t)), xn);
    if (!(R > bound))
        throw DomainError("decomposition needs R > 3 max(sqrt|t|, |x|) = " + std::to_string(bound) +
                          ", got R = " + std::to_string(R));
    const FunctionHandle v = linear_combination(1.0, u, -1.0, ui);
    const FunctionHandle one = constant_function(p.n, 1.0);

    DecompositionResult d;
    d.R = R;
    const QuadResult I = integrate_interior_difference(v, at, R, p, q);
    const QuadResult mass = integrate_exterior(one, at, R, p, q);
    const QuadResult Fu = integrate_exterior(u, at, R, p, q);
    const QuadResult Fi = integrate_exterior(ui, at, R, p, q);
    const double v0 = v(at.x, at.t);
    d.I = I.value;
    d.exterior_mass = mass.value;
    d.E = v0 * mass.value - Fu.value;
    d.F = Fi.value;
    d.err_estimate = I.err_estimate + std::abs(v0) * mass.err_estimate + Fu.err_estimate + Fi.err_estimate;
    d.e_bound_shape = std::abs(v0) * mass.value;
    return d;
}

HeatLimitReport heat_limit_check(const FunctionHandle& u, const SpaceTimePoint& at, const std::vector<double>& s_list,
                                 const KernelParams& p, const QuadSpec& q) {
    HeatLimitReport rep;
    for (double s : s_list) {
        const KernelParams ps = kernel_constants(p.n, s, p.normalization);
        const QuadResult r = master_op(u, at, ps, q);
        rep.entries.push_back({s, r.value, r.err_estimate});
    }
    const double h = 1e-4;
    const double ut = (u(at.x, at.t + h) - u(at.x, at.t - h)) / (2.0 * h);
    double lap = 0.0;
    std::vector<double> y = at.x;
    const double u0 = u(at.x, at.t);
    for (std::size_t k = 0; k < y.size(); ++k) {
        y[k] = at.x[k] + h;
        const double up = u(y, at.t);
        y[k] = at.x[k] - h;
        const double um = u(y, at.t);
        y[k] = at.x[k];
        lap += (up - 2.0 * u0 + um) / (h * h);
    }
    rep.classical = ut - lap;
    return rep;
}

} // namespace masterop
