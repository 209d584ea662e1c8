#include "masterop/function.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace masterop {

bool SupportBox::contains(std::span<const double> x, double t) const {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return r2 <= radius * radius && t >= t_lo && t <= t_hi;
}

FunctionHandle constant_function(int dim, double value) {
    FunctionHandle h;
    h.dim = dim;
    h.evaluator = [value](std::span<const double>, double) { return value; };
    h.dependence = Dependence::Constant;
    if (value == 0.0) h.support = SupportBox{0.0, 0.0, 0.0};
    return h;
}

namespace {

Dependence merge(Dependence a, Dependence b) {
    if (a == Dependence::Constant) return b;
    if (b == Dependence::Constant) return a;
    if (a == b) return a;
    return Dependence::SpaceTime;
}

} // namespace

FunctionHandle linear_combination(double a, const FunctionHandle& u, double b, const FunctionHandle& v) {
    FunctionHandle h;
    h.dim = std::max(u.dim, v.dim);
    h.evaluator = [a, b, fu = u.evaluator, fv = v.evaluator](std::span<const double> x, double t) {
        return a * fu(x, t) + b * fv(x, t);
    };
    if (u.support && v.support) {
        h.support = SupportBox{std::max(u.support->radius, v.support->radius),
                               std::min(u.support->t_lo, v.support->t_lo),
                               std::max(u.support->t_hi, v.support->t_hi)};
    }
    if (u.growth_envelope || v.growth_envelope)
        h.growth_envelope = u.growth_envelope.value_or("") + (u.growth_envelope && v.growth_envelope ? "; " : "") +
                            v.growth_envelope.value_or("");
    h.smoothness = (u.smoothness == Smoothness::Holder || v.smoothness == Smoothness::Holder) ? Smoothness::Holder
                                                                                               : Smoothness::Smooth;
    if (u.epsilon && v.epsilon)
        h.epsilon = std::min(*u.epsilon, *v.epsilon);
    else if (u.epsilon)
        h.epsilon = u.epsilon;
    else
        h.epsilon = v.epsilon;
    h.dependence = merge(u.dependence, v.dependence);
    h.feature_length = std::min(u.feature_length, v.feature_length);
    h.feature_time = std::min(u.feature_time, v.feature_time);
    h.time_breaks = u.time_breaks;
    h.time_breaks.insert(h.time_breaks.end(), v.time_breaks.begin(), v.time_breaks.end());
    std::sort(h.time_breaks.begin(), h.time_breaks.end());
    h.time_breaks.erase(std::unique(h.time_breaks.begin(), h.time_breaks.end()), h.time_breaks.end());
    h.c1_limited_in_time = u.c1_limited_in_time || v.c1_limited_in_time;
    return h;
}

int spot_check_support(const FunctionHandle& u, int samples, unsigned long long seed) {
    if (!u.support) return 0;
    const SupportBox& box = *u.support;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int bad = 0;
    std::vector<double> x(u.dim);
    for (int i = 0; i < samples; ++i) {
        const bool outside_space = box.spatially_bounded() && (i % 2 == 0 || !std::isfinite(box.t_lo));
        double r = outside_space ? box.radius * (1.0 + 4.0 * unit(rng)) + 1e-9 : 10.0 * unit(rng);
        double norm = 0.0;
        for (auto& c : x) {
            c = gauss(rng);
            norm += c * c;
        }
        norm = std::sqrt(norm);
        for (auto& c : x) c *= r / (norm > 0 ? norm : 1.0);
        double t;
        if (outside_space) {
            t = 20.0 * (unit(rng) - 0.5);
        } else if (std::isfinite(box.t_lo)) {
            t = box.t_lo - 1e-9 - 10.0 * unit(rng);
        } else if (std::isfinite(box.t_hi)) {
            t = box.t_hi + 1e-9 + 10.0 * unit(rng);
        } else {
            continue;
        }
        if (u(x, t) != 0.0) ++bad;
    }
    return bad;
}

} // namespace masterop
