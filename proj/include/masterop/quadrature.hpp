#pragma once

#include "masterop/function.hpp"
#include "masterop/kernel.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace masterop {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Hermite rule for the weight e^{-z^2} on R. Orders 1..200.
QuadratureRule gauss_hermite_nodes(int order);
/// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre_nodes(int order);

/// Process-wide immutable tables; safe to share between threads.
const QuadratureRule& cached_gauss_hermite(int order);
const QuadratureRule& cached_gauss_legendre(int order);

struct QuadSpec {
    int gh_order = 20;
    /// Panel density of the geometric continuation beyond the horizon.
    int panels_per_decade = 4;
    /// Ratio between consecutive time panels, in (0,1).
    double grading = 0.5;
    double a_min = 1e-10;
    /// Outer time truncation; nullopt means Auto (derived from the support box).
    std::optional<double> horizon;
    /// Radial truncation for the direct fractional Laplacian route; nullopt means Auto.
    std::optional<double> radial_horizon;
    int gl_order = 8;
    double rel_tol = 1e-6;
    /// Record per-panel contributions in QuadResult::panels.
    bool trace = false;
};

void validate(const QuadSpec& q);

struct PanelContribution {
    double lo = 0.0;
    double hi = 0.0;
    double value = 0.0;
};

struct QuadResult {
    double value = 0.0;
    double err_estimate = 0.0;
    bool truncation_flag = false;
    std::size_t nodes_used = 0;
    std::vector<PanelContribution> panels;
};

struct TimePanel {
    double lo = 0.0;
    double hi = 0.0;
};

/// Geometric panels (a_k * grading, a_k] with a_0 = horizon, emitted while a_k > a_min.
std::vector<TimePanel> graded_time_mesh(double horizon, double grading, double a_min);

/// The master-operator difference integral
///   K (4 pi)^{n/2} int_0^inf a^{-(1+s)} E_z[u(x,t) - u(x + 2 sqrt(a) z, t - a)] da,
/// with K the kernel constant of p and E_z the Gaussian average under e^{-|z|^2}.
/// Small a uses tensor Gauss-Hermite on the difference; larger a a composite
/// Gauss-Legendre rule over the kernel window intersected with the support.
QuadResult integrate_difference(const FunctionHandle& u, const SpaceTimePoint& at, const KernelParams& p,
                                const QuadSpec& q);

/// C int_0^inf (u(t) - u(t-a)) a^{-1-s} da for a function of time only.
QuadResult integrate_time_difference(const FunctionHandle& u, double t, double constant, double s,
                                     const QuadSpec& q);

/// C int_{R^n} (u(x) - u(y)) |x-y|^{-n-2s} dy for a function of space only, in polar form.
QuadResult integrate_radial_difference(const FunctionHandle& u, std::span<const double> x, double constant,
                                       double s, const QuadSpec& q);

/// int over (R^n x (-inf,t)) \ Q_R of u(y,tau) M(x-y, t-tau).
QuadResult integrate_exterior(const FunctionHandle& u, const SpaceTimePoint& at, double R, const KernelParams& p,
                              const QuadSpec& q);

/// int over B_R x (-R^2, t) of (v(x,t) - v(y,tau)) M(x-y, t-tau).
QuadResult integrate_interior_difference(const FunctionHandle& v, const SpaceTimePoint& at, double R,
                                         const KernelParams& p, const QuadSpec& q);

} // namespace masterop
