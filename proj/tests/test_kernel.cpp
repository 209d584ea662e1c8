#include "generators.hpp"

#include "masterop/errors.hpp"
#include "masterop/kernel.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace masterop;

namespace {

KernelParams raw(int n, double s) { return kernel_constants(n, s, Normalization::Raw); }

double norm_pdf_sum_1d(double dt, const KernelParams& p) {
    // trapezoid over a wide window; spectrally accurate for a Gaussian
    const double L = 40.0 * std::sqrt(dt), h = L / 4000.0;
    double acc = 0.0;
    for (int i = -4000; i <= 4000; ++i) {
        const double x[1] = {i * h};
        acc += kernel_eval(x, dt, p).value;
    }
    return acc * h;
}

} // namespace

TEST_CASE("kernel values in raw mode") {
    const double zero[1] = {0.0}, two[1] = {2.0};
    CHECK(kernel_eval(zero, 1.0, raw(1, 0.5)).value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(kernel_eval(two, 1.0, raw(1, 0.5)).value == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    const double zero2[2] = {0.0, 0.0};
    CHECK(kernel_eval(zero2, 4.0, raw(2, 0.5)).value == doctest::Approx(0.03125).epsilon(1e-15));
    CHECK_THROWS_AS(kernel_eval(zero, 0.0, raw(1, 0.5)), DomainError);
    CHECK_THROWS_AS(kernel_eval(zero, -1.0, raw(1, 0.5)), DomainError);
}

TEST_CASE("kernel underflow is flagged") {
    const double far[1] = {1e200};
    const auto v = kernel_eval(far, 1e-10, raw(1, 0.5));
    CHECK(v.value == 0.0);
    CHECK(v.underflow);
}

TEST_CASE("normalization constants") {
    const double pi = std::numbers::pi;
    const auto p = kernel_constants(1, 0.5);
    CHECK(p.c_ns == doctest::Approx(1.0 / (4.0 * pi)).epsilon(1e-13));
    CHECK(p.C_s == doctest::Approx(0.5 / std::sqrt(pi)).epsilon(1e-13));
    CHECK(p.C_ns_lap == doctest::Approx(1.0 / pi).epsilon(1e-13));
    CHECK(kernel_constants(3, 0.5).C_ns_lap == doctest::Approx(1.0 / (pi * pi)).epsilon(1e-13));
    // s = 1/2, n = 2: 2 Gamma(3/2) / (pi 2 sqrt(pi)) = 1 / (2 pi)
    CHECK(kernel_constants(2, 0.5).C_ns_lap == doctest::Approx(0.5 / pi).epsilon(1e-13));

    const auto r = raw(2, 0.3);
    CHECK(r.master_constant() == 1.0);
    CHECK(r.marchaud_constant() == 1.0);
    CHECK(r.laplacian_constant() == 1.0);

    CHECK_THROWS_AS(kernel_constants(1, 0.0), DomainError);
    CHECK_THROWS_AS(kernel_constants(1, 1.0), DomainError);
    CHECK_THROWS_AS(kernel_constants(4, 0.5), DomainError);
}

TEST_CASE("property: constants positive and Lambda dominates c_ns") {
    gen::for_cases(40, 11, [](gen::Source& g, int) {
        const int n = g.integer(1, 3);
        const double s = g.uniform(0.02, 0.98);
        const auto p = kernel_constants(n, s);
        CHECK(p.c_ns > 0.0);
        CHECK(p.C_s > 0.0);
        CHECK(p.C_ns_lap > 0.0);
        CHECK(p.Lambda >= p.c_ns);
        // |Gamma(-s)| = Gamma(1-s)/s, from lgamma
        const double absgamma = std::exp(std::lgamma(1.0 - s)) / s;
        CHECK(p.c_ns == doctest::Approx(1.0 / (std::pow(4.0 * std::numbers::pi, 0.5 * n) * absgamma)).epsilon(1e-12));
    });
}

TEST_CASE("spatial integral of the kernel") {
    for (double s : {0.25, 0.5, 0.75}) {
        const auto p = raw(1, s);
        for (double dt : {0.01, 1.0, 7.0}) {
            const double expect = std::sqrt(4.0 * std::numbers::pi) * std::pow(dt, -1.0 - s);
            CHECK(norm_pdf_sum_1d(dt, p) == doctest::Approx(expect).epsilon(1e-10));
        }
    }
}

TEST_CASE("decay bound") {
    const auto p = kernel_constants(1, 0.5);
    const double zero[1] = {0.0};
    auto at_cns = p;
    at_cns.Lambda = p.c_ns;
    CHECK(kernel_decay_check(zero, 3.0, at_cns).pass);

    const double one[1] = {1.0};
    CHECK(kernel_decay_check(one, 1.0, p).pass);
    const double ten[1] = {10.0};
    const auto far = kernel_decay_check(ten, 0.01, p);
    CHECK(far.pass);
    CHECK(far.value < 1e-100 * far.majorant);
}

TEST_CASE("property: decay bound holds off the fitting grid") {
    gen::for_cases(300, 23, [](gen::Source& g, int) {
        const int n = g.integer(1, 3);
        const auto p = kernel_constants(n, g.uniform(0.05, 0.95));
        const auto dx = g.vec(n, -1.0, 1.0);
        const double scale = g.log_uniform(1e-3, 1e3);
        std::vector<double> y(dx);
        for (auto& v : y) v *= scale;
        CHECK(kernel_decay_check(y, g.log_uniform(1e-3, 1e3), p).pass);
    });
}

TEST_CASE("log ratio") {
    const double a[1] = {0.0}, b[1] = {2.0};
    CHECK(kernel_log_ratio(a, a, 1.0) == 0.0);
    CHECK(kernel_log_ratio(a, b, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(kernel_log_ratio(a, b, 0.0), DomainError);
}

TEST_CASE("property: log ratio antisymmetric and consistent with log_kernel") {
    gen::for_cases(200, 5, [](gen::Source& g, int) {
        const int n = g.integer(1, 3);
        const auto p = kernel_constants(n, g.uniform(0.05, 0.95));
        const auto x = g.vec(n, -50.0, 50.0), y = g.vec(n, -50.0, 50.0);
        const double dt = g.log_uniform(1e-2, 1e2);
        CHECK(kernel_log_ratio(x, y, dt) == -kernel_log_ratio(y, x, dt));
        const double direct = log_kernel(x, dt, p) - log_kernel(y, dt, p);
        CHECK(kernel_log_ratio(x, y, dt) == doctest::Approx(direct).epsilon(1e-9).scale(1.0));
    });
}

TEST_CASE("property: kernel positive") {
    gen::for_cases(200, 7, [](gen::Source& g, int) {
        const int n = g.integer(1, 3);
        const auto p = kernel_constants(n, g.uniform(0.05, 0.95));
        const auto x = g.vec(n, -5.0, 5.0);
        CHECK(kernel_eval(x, g.log_uniform(1e-1, 1e2), p).value > 0.0);
    });
}
