#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace masterop {

enum class Dependence { SpaceTime, SpaceOnly, TimeOnly, Constant };

/// Smooth: C^2 in x and C^1 in t (piecewise across declared time breaks).
/// Holder: only C^{2s+eps, s+eps/2}; quadrature error bounds degrade accordingly.
enum class Smoothness { Smooth, Holder };

/// u vanishes outside { |x| <= radius } x [t_lo, t_hi]. Unbounded sides use infinities.
struct SupportBox {
    double radius = std::numeric_limits<double>::infinity();
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();

    bool spatially_bounded() const { return radius < std::numeric_limits<double>::infinity(); }
    bool contains(std::span<const double> x, double t) const;
};

/// An evaluable space-time function u(x,t) plus the metadata the quadrature needs.
///
/// The evaluator must be total on R^n x R and reentrant; if `support` is set it must
/// return 0 outside the box. `feature_length` / `feature_time` are the smallest scales
/// on which u varies; the quadrature resolves panels down to half of them.
struct FunctionHandle {
    using Evaluator = std::function<double(std::span<const double>, double)>;

    Evaluator evaluator;
    int dim = 1;
    std::optional<SupportBox> support;
    std::optional<std::string> growth_envelope;
    Smoothness smoothness = Smoothness::Smooth;
    std::optional<double> epsilon;
    Dependence dependence = Dependence::SpaceTime;
    double feature_length = 1.0;
    double feature_time = 1.0;
    /// Times where u is only piecewise smooth in t (e.g. the kink of (t_+)^2 at 0).
    std::vector<double> time_breaks;
    /// Set when u is C^1 but not C^2 in t somewhere (pos() in the DSL).
    bool c1_limited_in_time = false;

    double operator()(std::span<const double> x, double t) const { return evaluator(x, t); }
};

FunctionHandle constant_function(int dim, double value);

/// a*u + b*v with merged metadata (support = union box, finest feature scales).
FunctionHandle linear_combination(double a, const FunctionHandle& u, double b, const FunctionHandle& v);

/// Samples points outside the declared support and returns how many evaluate nonzero.
int spot_check_support(const FunctionHandle& u, int samples = 256, unsigned long long seed = 0xA11CE);

} // namespace masterop
