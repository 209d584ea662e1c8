#pragma once

#include "masterop/function.hpp"
#include "masterop/kernel.hpp"
#include "masterop/quadrature.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace masterop {

/// F(x,t,R): integral of u M(x-y, t-tau) over (R^n x (-inf,t)) \ Q_R. Requires R > 3 max(sqrt|t|, |x|).
QuadResult tail_functional(const FunctionHandle& u, const SpaceTimePoint& at, double R, const KernelParams& p,
                           const QuadSpec& q = {});

using Family = std::function<FunctionHandle(int j)>;

struct DefectSample {
    int j = 0;
    double R = 0.0;
    SpaceTimePoint at;
    double F_value = 0.0;
    double err = 0.0;
};

struct DefectOptions {
    /// Successive-iterate tolerance for both limits.
    double tol = 5e-3;
    int jobs = 1;
    /// If > 0, also evaluate master(limit_u) - master(u_j) at each probe for this j.
    int consistency_j = 0;
};

struct DefectReport {
    std::vector<DefectSample> samples;
    std::vector<SpaceTimePoint> probes;
    /// Per-probe double limit; nullopt where a limit did not stabilise.
    std::vector<std::optional<double>> b_per_probe;
    std::optional<double> b_estimate;
    double b_spread = 0.0;
    bool converged = false;
    bool monotone_ok = false;
    /// Largest F at the last j.
    double liminf_bound_M = 0.0;
    /// Smallest scheduled R from which sup_probes F <= M + 1 holds for every larger scheduled R.
    double N_threshold = 0.0;
    /// master(limit_u) - master(u_j) per probe when requested.
    std::vector<double> consistency;
    std::vector<std::string> notes;
};

/// Five probes spread in Q_{R_max/3}.
std::vector<SpaceTimePoint> default_probes(int n, double R_max);

/// Estimates b = lim_R lim_j F_j(probe, R). Skips (probe, R) pairs with R <= 3 max(sqrt|t|, |x|).
DefectReport defect_estimate(const Family& family, const FunctionHandle& limit_u,
                             const std::vector<SpaceTimePoint>& probes, const std::vector<double>& R_schedule,
                             const std::vector<int>& j_schedule, const KernelParams& p, const QuadSpec& q = {},
                             const DefectOptions& opt = {});

struct WeightDiagnostic {
    /// Increments of int |u| / (1 + |x|^{n+2+2s} + |t|^{n/2+1+s}) between boxes |x| <= r, |t| <= r^2.
    std::vector<double> L2ss_tail;
    /// Increments of int |u(x,tau)| e^{-|x|^2/(4|tau|)} / (1 + |tau|^{n/2+1+s}) between past cones
    /// |x| <= r, -r^2 <= tau < 0.
    std::vector<double> L_tail;
};

WeightDiagnostic weight_diagnostic(const FunctionHandle& u, const std::vector<double>& truncation_radii,
                                   const KernelParams& p);

} // namespace masterop
