#include "masterop/families.hpp"

#include "masterop/errors.hpp"
#include "masterop/operators.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace masterop {

double standard_bump(double r) {
    if (!(r > 2.0 && r < 3.0)) return 0.0;
    return std::exp(-1.0 / ((r - 2.0) * (3.0 - r)));
}

double eta_profile(double t) {
    const double tp = t > 0.0 ? t : 0.0;
    return tp * tp + 1.0;
}

Regime FamilyParams::regime() const {
    const double crit = 2.0 * beta * s;
    if (std::abs(alpha - crit) <= 1e-12 * std::max(1.0, crit)) return Regime::Critical;
    return alpha < crit ? Regime::Subcritical : Regime::Supercritical;
}

namespace {

double bump_moment(double power) {
    auto f = [power](double r) { return standard_bump(r) * std::pow(r, -power); };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 2.0, 3.0, 15, 1e-13, &err);
}

void require_order(double s) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("fractional order s must lie in (0,1)");
}

} // namespace

double C0_constant(double s, int n, Normalization mode) {
    require_order(s);
    const double raw = unit_sphere_measure(n) * bump_moment(1.0 + 2.0 * s);
    if (mode == Normalization::Raw) return raw;
    return kernel_constants(n, s, Normalization::Normalized).C_ns_lap * raw;
}

double C1_constant(double s, Normalization mode) {
    require_order(s);
    const double raw = bump_moment(1.0 + s);
    if (mode == Normalization::Raw) return raw;
    return s / std::tgamma(1.0 - s) * raw;
}

FamilyParams make_family_params(int j, double alpha, double beta, double gamma, double s, int n, Normalization mode) {
    require_order(s);
    if (j < 1) throw DomainError("family index j must be >= 1");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("alpha and beta must be positive");
    if (!(gamma > s)) throw ConstraintError("w family needs gamma > s");
    FamilyParams fp;
    fp.j = j;
    fp.alpha = alpha;
    fp.beta = beta;
    fp.gamma = gamma;
    fp.s = s;
    fp.n = n;
    fp.mode = mode;
    fp.C0 = C0_constant(s, n, mode);
    fp.C1 = C1_constant(s, mode);
    fp.omega_nm1 = unit_sphere_measure(n);
    return fp;
}

FunctionHandle phi_family(int j, double alpha, double beta, int n) {
    if (j < 1) throw DomainError("family index j must be >= 1");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("alpha and beta must be positive");
    const double scale = std::pow(double(j), beta);
    const double amp = std::pow(double(j), alpha);
    FunctionHandle h;
    h.dim = n;
    h.evaluator = [scale, amp](std::span<const double> x, double) {
        return amp * standard_bump(std::sqrt(squared_norm(x)) / scale);
    };
    h.support = SupportBox{3.0 * scale, -std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
    h.dependence = Dependence::SpaceOnly;
    h.feature_length = 0.05 * scale;
    h.feature_time = std::numeric_limits<double>::infinity();
    return h;
}

FunctionHandle psi_family(int j, double alpha, double beta) {
    if (j < 1) throw DomainError("family index j must be >= 1");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("alpha and beta must be positive");
    const double scale = std::pow(double(j), beta);
    const double amp = std::pow(double(j), alpha);
    FunctionHandle h;
    h.dim = 1;
    h.evaluator = [scale, amp](std::span<const double>, double t) { return amp * standard_bump(-t / scale); };
    h.support = SupportBox{std::numeric_limits<double>::infinity(), -3.0 * scale, -2.0 * scale};
    h.dependence = Dependence::TimeOnly;
    h.feature_time = 0.05 * scale;
    return h;
}

FunctionHandle w_family(int j, double gamma, double s, int n, Normalization mode) {
    require_order(s);
    if (!(gamma > s)) throw ConstraintError("w family needs gamma > s, got gamma = " + std::to_string(gamma));
    const FunctionHandle phi = phi_family(j, 2.0 * s, 1.0, n);
    const double c0 = C0_constant(s, n, mode);
    const double tscale = std::pow(double(j), gamma);
    FunctionHandle h = phi;
    h.evaluator = [f = phi.evaluator, c0, tscale](std::span<const double> x, double t) {
        const double p = f(x, t);
        return p == 0.0 ? 0.0 : p * eta_profile(t / tscale) / c0;
    };
    h.dependence = Dependence::SpaceTime;
    h.feature_time = tscale;
    h.time_breaks = {0.0};
    h.c1_limited_in_time = true;
    h.growth_envelope = "quadratic growth in t_+";
    return h;
}

FunctionHandle rescale(const FunctionHandle& u, double Mk, double lambda, std::span<const double> x_bar, double t_bar) {
    if (!(Mk > 0.0) || !(lambda > 0.0)) throw DomainError("rescale needs Mk > 0 and lambda > 0");
    if (static_cast<int>(x_bar.size()) != u.dim) throw DomainError("rescale: x_bar dimension mismatch");
    const std::vector<double> xb(x_bar.begin(), x_bar.end());
    FunctionHandle v = u;
    v.evaluator = [f = u.evaluator, Mk, lambda, xb, t_bar](std::span<const double> x, double t) {
        std::vector<double> y(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) y[k] = lambda * x[k] + xb[k];
        return f(y, lambda * lambda * t + t_bar) / Mk;
    };
    const double l2 = lambda * lambda;
    if (u.support) {
        SupportBox b = *u.support;
        if (b.spatially_bounded()) b.radius = (std::sqrt(squared_norm(xb)) + b.radius) / lambda;
        b.t_lo = (b.t_lo - t_bar) / l2;
        b.t_hi = (b.t_hi - t_bar) / l2;
        v.support = b;
    }
    if (u.growth_envelope) v.growth_envelope = *u.growth_envelope + " (rescaled)";
    v.feature_length = u.feature_length / lambda;
    v.feature_time = u.feature_time / l2;
    for (auto& tb : v.time_breaks) tb = (tb - t_bar) / l2;
    return v;
}

SandwichBounds example3_bounds(int j, double gamma, const KernelParams& p, const SpaceTimePoint& at, const QuadSpec& q) {
    if (!(gamma > p.s)) throw ConstraintError("w family needs gamma > s");
    if (p.normalization != Normalization::Normalized)
        throw DomainError("example3_bounds compares normalized operators only");
    const double s = p.s;
    const double c0 = C0_constant(s, p.n, p.normalization);
    const FunctionHandle phi = phi_family(j, 2.0 * s, 1.0, p.n);
    SandwichBounds b;
    b.laplacian = fractional_laplacian(phi, at.x, p, q).value;
    const double tscale = std::pow(double(j), gamma);
    b.lower = eta_profile(at.t / tscale) * b.laplacian / c0;
    const double tp = at.t > 0.0 ? at.t : 0.0;
    const double sup_phi = std::pow(double(j), 2.0 * s) * std::exp(-4.0);
    const double dt_eta = 2.0 / std::tgamma(3.0 - s) * std::pow(double(j), -2.0 * gamma) * std::pow(tp, 2.0 - s);
    b.upper = b.lower + sup_phi * dt_eta / c0;
    return b;
}

} // namespace masterop
