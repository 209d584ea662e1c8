#pragma once

#include "masterop/function.hpp"
#include "masterop/kernel.hpp"
#include "masterop/quadrature.hpp"

#include <span>

namespace masterop {

/// exp(-1/((r-2)(3-r))) on (2,3), zero elsewhere.
double standard_bump(double r);

/// (t_+)^2 + 1.
double eta_profile(double t);

enum class Regime { Subcritical, Critical, Supercritical };

struct FamilyParams {
    int j = 1;
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    double s = 0.5;
    int n = 1;
    Normalization mode = Normalization::Normalized;
    double C0 = 0.0;
    double C1 = 0.0;
    double omega_nm1 = 2.0;

    /// alpha against 2 beta s for the spatial family.
    Regime regime() const;
};

/// Populates C0, C1 and omega_nm1. Throws ConstraintError if gamma <= s.
FamilyParams make_family_params(int j, double alpha, double beta, double gamma, double s, int n = 1,
                                Normalization mode = Normalization::Normalized);

/// x -> j^alpha bump(j^{-beta}|x|), supported in |x| <= 3 j^beta.
FunctionHandle phi_family(int j, double alpha, double beta, int n = 1);

/// t -> j^alpha bump(-j^{-beta} t), supported in [-3 j^beta, -2 j^beta].
FunctionHandle psi_family(int j, double alpha, double beta);

/// phi_j(x) eta(j^{-gamma} t) / C0 with alpha = 2s, beta = 1. Throws ConstraintError if gamma <= s.
FunctionHandle w_family(int j, double gamma, double s, int n = 1, Normalization mode = Normalization::Normalized);

/// Raw: omega_{n-1} int_2^3 bump(r) r^{-1-2s} dr. Normalized: times C_{n,s}.
double C0_constant(double s, int n, Normalization mode = Normalization::Normalized);

/// Raw: int_2^3 bump(r) r^{-1-s} dr. Normalized: times C_s.
/// The Marchaud derivative of psi_j (alpha = beta s) at t = 0 equals -C1 for every j.
double C1_constant(double s, Normalization mode = Normalization::Normalized);

/// v(x,t) = u(lambda x + x_bar, lambda^2 t + t_bar) / Mk with transformed metadata.
FunctionHandle rescale(const FunctionHandle& u, double Mk, double lambda, std::span<const double> x_bar, double t_bar);

struct SandwichBounds {
    double lower = 0.0;
    double upper = 0.0;
    /// (-Delta)^s phi_j(x) used for both bounds.
    double laplacian = 0.0;
};

/// Bounds for the master operator of w_j at `at` (normalized constants):
///   lower = eta_j(t) (-Delta)^s phi_j(x) / C0
///   upper = lower + sup phi_j * d_t^s eta_j(t) / C0, with d_t^s eta_j(t) = 2/Gamma(3-s) j^{-2 gamma} (t_+)^{2-s}.
SandwichBounds example3_bounds(int j, double gamma, const KernelParams& p, const SpaceTimePoint& at,
                               const QuadSpec& q = {});

} // namespace masterop
