#include "fixtures.hpp"
#include "generators.hpp"

#include "masterop/errors.hpp"
#include "masterop/families.hpp"
#include "masterop/operators.hpp"

#include <doctest.h>

#include <cmath>

using namespace masterop;

namespace {

double simpson(auto f, double a, double b, int m) {
    const double h = (b - a) / m;
    double acc = f(a) + f(b);
    for (int i = 1; i < m; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return acc * h / 3.0;
}

SpaceTimePoint pt(double x, double t) { return SpaceTimePoint{{x}, t}; }

} // namespace

TEST_CASE("master operator of a constant") {
    const auto r = master_op(constant_function(1, 7.0), pt(0.3, 0.1), kernel_constants(1, 0.5));
    CHECK(std::abs(r.value) <= 1e-8);
}

TEST_CASE("master operator symbol at the origin") {
    const auto r = master_op(fx::exp_cos(1.0, 1.0), pt(0.0, 0.0), kernel_constants(1, 0.5));
    CHECK(r.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("property: master operator matches the symbol") {
    gen::for_cases(8, 41, [](gen::Source& g, int) {
        const int n = g.integer(1, 2);
        const double s = g.uniform(0.15, 0.85);
        const double lambda = g.uniform(0.2, 2.0), xi = g.uniform(0.0, 2.0);
        SpaceTimePoint at{g.vec(n, -1.0, 1.0), g.uniform(-1.0, 1.0)};
        const auto u = fx::exp_cos(lambda, xi, n);
        const double expect = std::pow(lambda + xi * xi, s) * u(at.x, at.t);
        const auto r = master_op(u, at, kernel_constants(n, s));
        CHECK(r.value == doctest::Approx(expect).epsilon(1e-3).scale(1.0));
    });
}

TEST_CASE("reduction identities") {
    const auto p = kernel_constants(1, 0.5);
    const double x[1] = {0.0};
    const auto c = fx::cos_x();
    CHECK(std::abs(master_op(c, pt(0.0, 0.0), p).value - fractional_laplacian(c, x, p).value) <= 1e-4);
    const auto e = fx::exp_t();
    CHECK(std::abs(master_op(e, pt(0.0, 0.0), p).value - marchaud(e, 0.0, p).value) <= 1e-4);
}

TEST_CASE("fractional Laplacian values") {
    const auto p = kernel_constants(1, 0.5);
    const double x[1] = {0.0};
    CHECK(std::abs(fractional_laplacian(constant_function(1, 1.0), x, p).value) <= 1e-8);
    CHECK(fractional_laplacian(fx::cos_x(), x, p).value == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(fractional_laplacian(fx::cos_x(), x, p, {}, LaplacianRoute::Master).value ==
          doctest::Approx(1.0).epsilon(1e-3));
    CHECK_THROWS_AS(fractional_laplacian(fx::exp_cos(1.0, 1.0), x, p), DomainError);
}

TEST_CASE("property: fractional Laplacian of cos in higher dimension") {
    gen::for_cases(6, 43, [](gen::Source& g, int) {
        const int n = g.integer(1, 3);
        const double s = g.uniform(0.15, 0.85);
        const auto x = g.vec(n, -1.0, 1.0);
        const auto r = fractional_laplacian(fx::cos_x(n), x, kernel_constants(n, s));
        CHECK(r.value == doctest::Approx(std::cos(x[0])).epsilon(1e-3).scale(1.0));
    });
}

TEST_CASE("fractional Laplacian of the critical bump family") {
    // C0 raw = omega_1 int_2^3 bump(r) r^{-1-2s} dr with omega_1 = 2
    const double s = 0.5;
    const double c0raw = 2.0 * simpson([&](double r) { return standard_bump(r) * std::pow(r, -1.0 - 2.0 * s); },
                                       2.0, 3.0, 20000);
    const auto p = kernel_constants(1, s);
    const double x[1] = {0.0};
    const auto r = fractional_laplacian(phi_family(16, 2.0 * s, 1.0), x, p);
    CHECK(r.value == doctest::Approx(-p.C_ns_lap * c0raw).epsilon(0.02));
}

TEST_CASE("Marchaud derivative") {
    const auto p = kernel_constants(1, 0.5);
    CHECK(std::abs(marchaud(constant_function(1, 3.0), 0.4, p).value) <= 1e-8);
    CHECK(marchaud(fx::pos_sq_t(), 1.0, p).value == doctest::Approx(std::tgamma(3.0) / std::tgamma(2.5)).epsilon(1e-3));
    CHECK_THROWS_AS(marchaud(fx::cos_x(), 0.0, p), DomainError);

    FunctionHandle grows = fx::exp_t();
    grows.evaluator = [](std::span<const double>, double t) { return std::exp(-t); };
    CHECK_THROWS_AS(marchaud(grows, 0.0, p), IntegrabilityError);
}

TEST_CASE("property: Marchaud derivative of exp") {
    gen::for_cases(10, 47, [](gen::Source& g, int) {
        const double s = g.uniform(0.1, 0.9), t = g.uniform(-2.0, 2.0);
        const auto r = marchaud(fx::exp_t(), t, kernel_constants(1, s));
        CHECK(r.value == doctest::Approx(std::exp(t)).epsilon(1e-4));
    });
}

TEST_CASE("property: translation covariance") {
    gen::for_cases(5, 53, [](gen::Source& g, int) {
        const auto p = kernel_constants(1, g.uniform(0.2, 0.8));
        const auto u = fx::bump_st(1, g.uniform(-1.0, 1.0), g.uniform(1.5, 4.0), g.uniform(0.0, 1.5));
        const double x0 = g.uniform(-3.0, 3.0), t0 = g.uniform(-3.0, 3.0);
        const SpaceTimePoint at = pt(g.uniform(-1.0, 1.0), g.uniform(-1.0, 1.0));
        const auto a = master_op(u, at, p);
        const auto b = master_op(fx::shifted(u, x0, t0), pt(at.x[0] + x0, at.t + t0), p);
        CHECK(std::abs(a.value - b.value) <= 4.0 * (a.err_estimate + b.err_estimate) + 1e-10);
    });
}

TEST_CASE("property: linearity within 3x error") {
    gen::for_cases(5, 59, [](gen::Source& g, int) {
        const auto p = kernel_constants(1, g.uniform(0.2, 0.8));
        const auto u = fx::bump_st(1, 0.0, g.uniform(1.5, 4.0), g.uniform(0.0, 1.5));
        const auto v = fx::bump_st(1, 1.0, g.uniform(1.5, 4.0), g.uniform(0.0, 1.5));
        const double a = g.uniform(-2.0, 2.0), b = g.uniform(-2.0, 2.0);
        const SpaceTimePoint at = pt(g.uniform(-1.0, 1.0), g.uniform(-1.0, 1.0));
        const auto ru = master_op(u, at, p), rv = master_op(v, at, p);
        const auto rw = master_op(linear_combination(a, u, b, v), at, p);
        const double tol = 3.0 * (std::abs(a) * ru.err_estimate + std::abs(b) * rv.err_estimate + rw.err_estimate);
        CHECK(std::abs(rw.value - (a * ru.value + b * rv.value)) <= tol + 1e-12);
    });
}

TEST_CASE("property: parabolic scaling") {
    gen::for_cases(5, 61, [](gen::Source& g, int) {
        const double s = g.uniform(0.2, 0.8);
        const auto p = kernel_constants(1, s);
        const double lam = g.uniform(0.5, 2.0);
        const double l0 = g.uniform(0.3, 1.0), xi = g.uniform(0.3, 1.0);
        // u_lam(x,t) = u(lam x, lam^2 t) stays in the exp-cos family
        const auto u = fx::exp_cos(l0, xi);
        const auto ul = fx::exp_cos(l0 * lam * lam, xi * lam);
        const double x = g.uniform(-1.0, 1.0), t = g.uniform(-0.5, 0.5);
        const double lhs = master_op(ul, pt(x, t), p).value;
        const double rhs = std::pow(lam, 2.0 * s) * master_op(u, pt(lam * x, lam * lam * t), p).value;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-3).scale(1.0));
    });
}

TEST_CASE("decomposition with identical functions") {
    const auto p = kernel_constants(1, 0.5);
    const auto u = fx::bump_st(1, 0.0, 3.0, 0.5);
    const auto d = difference_decomposition(u, u, pt(0.2, 0.1), 20.0, p);
    CHECK(d.I == 0.0);
    CHECK(d.E == doctest::Approx(-d.F).scale(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(difference_decomposition(u, u, pt(10.0, 0.0), 20.0, p), DomainError);
    CHECK_THROWS_AS(difference_decomposition(u, u, pt(0.0, 50.0), 20.0, p), DomainError);
}

TEST_CASE("decomposition identity") {
    const auto p = kernel_constants(1, 0.5);
    const auto u = fx::bump_st(1, 0.0, 3.0, 0.5);
    const auto ui = fx::bump_st(1, 0.5, 2.0, 1.0);
    const SpaceTimePoint at = pt(0.3, 0.2);
    const auto mu = master_op(u, at, p), mi = master_op(ui, at, p);
    for (double R : {20.0, 50.0}) {
        const auto d = difference_decomposition(u, ui, at, R, p);
        const double tol = 4.0 * (d.err_estimate + mu.err_estimate + mi.err_estimate);
        CHECK(std::abs(d.I + d.E + d.F - (mu.value - mi.value)) <= tol + 1e-9);
    }
}

TEST_CASE("interior term vanishes once the bump family leaves the cylinder") {
    const auto p = kernel_constants(1, 0.5);
    const auto u = fx::bump_st(1, 0.0, 3.0, 0.5);
    const auto ui = linear_combination(1.0, u, 1.0, phi_family(16, 1.0, 1.0));
    const auto d = difference_decomposition(u, ui, pt(0.0, 0.0), 20.0, p);
    CHECK(std::abs(d.I) <= 1e-12);
}

TEST_CASE("heat limit") {
    const auto p = kernel_constants(1, 0.5);
    const auto r = heat_limit_check(fx::exp_cos(1.0, 1.0), pt(0.0, 0.0), {0.9, 0.95, 0.99}, p);
    REQUIRE(r.entries.size() == 3);
    CHECK(r.classical == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(r.entries[0].value == doctest::Approx(std::pow(2.0, 0.9)).epsilon(1e-3));
    double prev = 1e300;
    for (const auto& e : r.entries) {
        const double gap = std::abs(e.value - r.classical);
        CHECK(gap < prev);
        prev = gap;
    }
    const auto z = heat_limit_check(constant_function(1, 2.0), pt(0.0, 0.0), {0.5, 0.9}, p);
    for (const auto& e : z.entries) CHECK(std::abs(e.value) <= 1e-8);
}
