#pragma once

#include <span>
#include <vector>

namespace masterop {

enum class Normalization { Raw, Normalized };

/// Parameters of the fractional heat kernel M(x,t) = c t^{-(n/2+1+s)} exp(-|x|^2/(4t)).
///
/// In Raw mode every operator constant is 1. In Normalized mode
///   c_ns     = ((4 pi)^{n/2} |Gamma(-s)|)^{-1}
///   C_s      = s / Gamma(1-s)
///   C_ns_lap = 4^s Gamma(n/2+s) / (pi^{n/2} |Gamma(-s)|)
/// so that (d_t - Delta)^s has symbol (lambda + |xi|^2)^s on e^{lambda t} cos(xi.x).
struct KernelParams {
    int n = 1;
    double s = 0.5;
    Normalization normalization = Normalization::Normalized;
    double c_ns = 1.0;
    double C_s = 1.0;
    double C_ns_lap = 1.0;
    double Lambda = 1.0;

    /// Constant multiplying the space-time kernel (1 in Raw mode).
    double master_constant() const { return normalization == Normalization::Raw ? 1.0 : c_ns; }
    double marchaud_constant() const { return normalization == Normalization::Raw ? 1.0 : C_s; }
    double laplacian_constant() const { return normalization == Normalization::Raw ? 1.0 : C_ns_lap; }

    /// Exponent n/2 + 1 + s of the time singularity.
    double time_power() const { return 0.5 * n + 1.0 + s; }
    /// Exponent n + 2 + 2s of the spatial decay.
    double space_power() const { return n + 2.0 + 2.0 * s; }
};

struct SpaceTimePoint {
    std::vector<double> x;
    double t = 0.0;
};

struct KernelValue {
    double value = 0.0;
    bool underflow = false;
};

/// Builds params with populated constants and a Lambda fitted on the default grid.
/// Throws DomainError unless 0 < s < 1 and n in {1,2,3}.
KernelParams kernel_constants(int n, double s, Normalization mode = Normalization::Normalized);

/// |S^{n-1}|, with the convention omega_0 = 2.
double unit_sphere_measure(int n);

KernelValue kernel_eval(std::span<const double> dx, double dt, const KernelParams& p);

/// log M(dx, dt); finite for every finite dx.
double log_kernel(std::span<const double> dx, double dt, const KernelParams& p);

struct DecayCheck {
    double value = 0.0;
    double majorant = 0.0;
    bool pass = false;
};

/// M(dx,dt) <= Lambda / (|dx|^{n+2+2s} + dt^{n/2+1+s}).
DecayCheck kernel_decay_check(std::span<const double> dx, double dt, const KernelParams& p);

/// Sup of M(r,t) (r^{n+2+2s} + t^{n/2+1+s}) over a log-spaced grid of `points_per_axis`^2
/// points in [lo, hi]^2, times (1 + headroom).
double fit_lambda(const KernelParams& p, int points_per_axis = 100, double lo = 1e-3,
                  double hi = 1e3, double headroom = 0.01);

/// log M(dx1,dt) - log M(dx2,dt) = (|dx2|^2 - |dx1|^2) / (4 dt).
double kernel_log_ratio(std::span<const double> dx1, std::span<const double> dx2, double dt);

double squared_norm(std::span<const double> v);

} // namespace masterop
