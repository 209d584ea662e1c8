#pragma once

#include "masterop/function.hpp"
#include "masterop/kernel.hpp"
#include "masterop/quadrature.hpp"

#include <span>
#include <vector>

namespace masterop {

/// (d_t - Delta)^s u at a point. A truncation flag in the result is a warning, not a failure.
QuadResult master_op(const FunctionHandle& u, const SpaceTimePoint& at, const KernelParams& p,
                     const QuadSpec& q = {});

enum class LaplacianRoute {
    Direct, ///< radial singular quadrature of C_{n,s} P.V. int (u(x)-u(y)) |x-y|^{-n-2s} dy
    Master, ///< master operator on the time-constant extension
};

/// (-Delta)^s u(x) for u depending on x only.
QuadResult fractional_laplacian(const FunctionHandle& u, std::span<const double> x, const KernelParams& p,
                                const QuadSpec& q = {}, LaplacianRoute route = LaplacianRoute::Direct);

/// Marchaud derivative C_s int_0^inf (u(t) - u(t-a)) a^{-1-s} da for u depending on t only.
QuadResult marchaud(const FunctionHandle& u, double t, const KernelParams& p, const QuadSpec& q = {});

struct DecompositionResult {
    double I = 0.0;
    double E = 0.0;
    double F = 0.0;
    double R = 0.0;
    double err_estimate = 0.0;
    /// Exterior kernel mass int_{exterior} M, used to form E.
    double exterior_mass = 0.0;
    /// Diagnostic C / R^{2s} with C = |v(x,t)| * R^{2s} * exterior_mass (bound shape for E).
    double e_bound_shape = 0.0;
};

/// Splits master(u) - master(ui) at `at` into the interior term over Q_R and two exterior terms.
/// Requires R > 3 max(sqrt|t|, |x|).
DecompositionResult difference_decomposition(const FunctionHandle& u, const FunctionHandle& ui,
                                             const SpaceTimePoint& at, double R, const KernelParams& p,
                                             const QuadSpec& q = {});

struct HeatLimitEntry {
    double s = 0.0;
    double value = 0.0;
    double err_estimate = 0.0;
};

struct HeatLimitReport {
    std::vector<HeatLimitEntry> entries;
    /// (d_t - Delta) u at the point by central differences with step 1e-4.
    double classical = 0.0;
};

HeatLimitReport heat_limit_check(const FunctionHandle& u, const SpaceTimePoint& at, const std::vector<double>& s_list,
                                 const KernelParams& p, const QuadSpec& q = {});

} // namespace masterop
