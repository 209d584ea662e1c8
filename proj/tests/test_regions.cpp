#include "generators.hpp"

#include "masterop/errors.hpp"
#include "masterop/regions.hpp"

#include <doctest.h>

#include <cmath>

using namespace masterop;

namespace {

using V = std::vector<double>;

double norm(const V& v) {
    double q = 0.0;
    for (double x : v) q += x * x;
    return std::sqrt(q);
}

} // namespace

TEST_CASE("cylinder membership and scales") {
    ParabolicCylinder q{2.0, {}};
    CHECK(q.contains(V{2.0}, -4.0));
    CHECK_FALSE(q.contains(V{2.0001}, 0.0));
    CHECK_FALSE(q.contains(V{0.0}, -4.0001));
    ParabolicCylinder shifted{1.0, SpaceTimePoint{{5.0}, 10.0}};
    CHECK(shifted.contains(V{5.5}, 10.9));
    CHECK_FALSE(shifted.contains(V{0.0}, 0.0));
    CHECK(region_delta(1000.0) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(region_t0(100.0) == doctest::Approx(1000.0).epsilon(1e-14));
}

TEST_CASE("step-1 classification") {
    const double R = 100.0, t = 0.5;
    const V x{1.0};
    CHECK(classify_step1(V{50.0}, -10.0, x, t, R).label == Label::Interior);
    CHECK(classify_step1(V{2 * R}, t - 1.0, x, t, R).label == Label::A);
    CHECK(classify_step1(V{0.5 * R}, -2 * R * R, x, t, R).label == Label::C);
    // |y - x| < delta (t - tau) needs a long time lag
    CHECK(classify_step1(V{1.5 * R}, t - 1e5, x, t, R).label == Label::B);
    CHECK_THROWS_AS(classify_step1(V{0.0}, t, x, t, R), DomainError);
    CHECK_THROWS_AS(classify_step1(V{0.0}, t + 1.0, x, t, R), DomainError);
}

TEST_CASE("step-1 tie-breaks") {
    const double R = 1000.0, t = 0.0;
    const V x{0.0};
    const double delta = region_delta(R);
    // |y| = R stays on the inner side
    CHECK(classify_step1(V{R}, -2 * R * R, x, t, R).label == Label::C);
    // |y - x| = delta (t - tau) goes to A
    const double lag = 2 * R / delta;
    CHECK(classify_step1(V{2 * R}, t - lag, x, t, R).label == Label::A);
}

TEST_CASE("sectors") {
    const V zero{0.0, 0.0};
    auto s1 = sector_index(V{3.0, 1.0}, zero);
    CHECK(s1.j == 1);
    CHECK(s1.sign == 1);
    auto s2 = sector_index(V{-1.0, -5.0}, zero);
    CHECK(s2.j == 2);
    CHECK(s2.sign == -1);
    auto s3 = sector_index(V{2.0, 2.0}, zero);
    CHECK(s3.j == 1);
    CHECK(s3.sign == 1);
    CHECK_THROWS_AS(sector_index(zero, zero), DomainError);
}

TEST_CASE("property: sectors cover and are scale invariant") {
    gen::for_cases(500, 71, [](gen::Source& g, int) {
        const int n = g.integer(1, 3);
        const V x = g.vec(n, -5.0, 5.0), y = g.vec(n, -5.0, 5.0);
        const Sector s = sector_index(y, x);
        REQUIRE(s.j >= 1);
        REQUIRE(s.j <= n);
        double mx = 0.0;
        for (int k = 0; k < n; ++k) mx = std::max(mx, std::abs(y[k] - x[k]));
        CHECK(s.sign * (y[s.j - 1] - x[s.j - 1]) == mx);
        const double lam = g.log_uniform(1e-3, 1e3);
        V z(n);
        for (int k = 0; k < n; ++k) z[k] = x[k] + lam * (y[k] - x[k]);
        const Sector t = sector_index(z, x);
        CHECK(t.j == s.j);
        CHECK(t.sign == s.sign);
    });
}

TEST_CASE("step-2 classification") {
    const double R = 100.0, t = 0.0;
    const V y2{2 * R};
    CHECK(classify_step2(y2, t - R * R * 2 * R, t, R).label == Label::D);
    CHECK(classify_step2(y2, t - 1.0, t, R).label == Label::F);
    CHECK(classify_step2(V{0.1 * R}, -4 * R * R, t, R).label == Label::C);
    // tau below -R^{3/2} with a short lag relative to |y|
    CHECK(classify_step2(V{1e4 * R}, -2 * region_t0(R), t, R).label == Label::E);
    CHECK_THROWS_AS(classify_step2(V{0.5 * R}, -1.0, t, R), DomainError);
}

TEST_CASE("step-2 tie-breaks") {
    const double R = 100.0, t = 0.0;
    // (t - tau)^2 = R |y|^2 goes to D
    const double y = 3 * R;
    const double lag = std::sqrt(R) * y;
    CHECK(classify_step2(V{y}, t - lag, t, R).label == Label::D);
    // tau = -R^{3/2} goes to E
    CHECK(classify_step2(V{1e4 * R}, -region_t0(R), t, R).label == Label::E);
}

TEST_CASE("property: classifiers agree with the set predicates") {
    gen::for_cases(3000, 73, [](gen::Source& g, int) {
        const int n = g.integer(1, 3);
        const double R = g.log_uniform(10.0, 1e4);
        const V x = g.in_ball(n, R / 3.0);
        const double t = g.uniform(-R * R / 9.0, R * R / 9.0);
        const V y = g.vec(n, -4.0 * R, 4.0 * R);
        const double tau = t - g.log_uniform(1e-3, 1e3) * R * R;

        const auto l1 = classify_step1(y, tau, x, t, R).label;
        const int hits1 = int(membership::interior(y, tau, R)) + int(membership::step1_A(y, tau, x, t, R)) +
                          int(membership::step1_B(y, tau, x, t, R)) + int(membership::region_C(y, tau, R));
        CHECK(hits1 == 1);
        if (l1 == Label::A) CHECK(membership::step1_A(y, tau, x, t, R));
        if (l1 == Label::B) CHECK(membership::step1_B(y, tau, x, t, R));
        if (l1 == Label::C) CHECK(membership::region_C(y, tau, R));
        if (l1 == Label::Interior) CHECK(membership::interior(y, tau, R));

        if (membership::interior(y, tau, R)) return;
        const auto l2 = classify_step2(y, tau, t, R).label;
        if (l2 == Label::C) CHECK(membership::region_C(y, tau, R));
        if (l2 == Label::D) CHECK(membership::step2_D(y, tau, t, R));
        if (l2 == Label::E) CHECK(membership::step2_E(y, tau, t, R));
        if (l2 == Label::F) CHECK(membership::step2_F(y, tau, t, R));
    });
}

TEST_CASE("partition verification") {
    const V x{1.0, -2.0};
    const auto p1 = verify_partition_step1(x, 3.0, 100.0, 100000);
    CHECK(p1.pass());
    CHECK(p1.samples == 100000);
    const auto p2 = verify_partition_step2(2, 3.0, 100.0, 100000);
    CHECK(p2.pass());
    CHECK_THROWS_AS(verify_partition_step1(x, 3.0, 100.0, 0), DomainError);
}

TEST_CASE("c1 ratio at the delta boundary") {
    // single point with |y - x| = delta (t - tau): the shifted-point ratio has a closed form
    const double R = 1e4, delta = region_delta(R);
    const V x{0.0}, y{2.0 * R};
    const double dt = 2.0 * R / delta;
    const V d1{x[0] - y[0]}, d2{x[0] + 1.0 / (delta * delta) - y[0]};
    const double expect = -(2.0 * (y[0] - x[0]) - 1.0 / (delta * delta)) / (4.0 * dt * delta * delta);
    CHECK(kernel_log_ratio(d1, d2, dt) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("c1 envelope decreases with R") {
    const V x{0.0};
    const auto big = verify_ratio_c1(x, 0.0, 1e4, 1000);
    const auto small = verify_ratio_c1(x, 0.0, 1e2, 1000);
    CHECK(big.pass);
    CHECK(big.max_ratio() < 1.0);
    CHECK(big.max_ratio() < small.max_ratio());
    const auto sweep = verify_ratio_c1_sweep(x, 0.0, {1e2, 1e3, 1e4}, 1000);
    CHECK(sweep.strictly_decreasing);
    const auto tiny = verify_ratio_c1(x, 0.0, 0.3, 10);
    CHECK(tiny.degenerate);
    CHECK_FALSE(tiny.pass);
}

TEST_CASE("c2 and c3 envelopes") {
    const V zero{0.0};
    const auto z = verify_ratio_c2_c3(zero, 0.0, 1e4, 500);
    CHECK(z.c2.max_log == 0.0);
    CHECK(z.c3.max_log == 0.0);
    const V one{1.0};
    const auto r = verify_ratio_c2_c3(one, 0.0, 1e4, 5000);
    CHECK(r.c2.pass);
    CHECK(r.c3.pass);
    CHECK(r.c2.envelope_log == doctest::Approx(std::pow(1e4, -1.0 / 3.0) * 1.25).epsilon(1e-12));
    CHECK(r.c3.envelope_log <= 1.0 / 1e4);
}

TEST_CASE("property: c2/c3 envelopes hold across points") {
    gen::for_cases(10, 79, [](gen::Source& g, int i) {
        const int n = g.integer(1, 3);
        const double R = g.log_uniform(1e2, 1e5);
        const V x = g.in_ball(n, std::min(R / 3.0, 5.0));
        const double t = g.uniform(-R * R / 9.0, R * R / 9.0);
        const auto r = verify_ratio_c2_c3(x, t, R, 2000, 1000 + i);
        CHECK(r.c2.pass);
        CHECK(r.c3.pass);
    });
}

TEST_CASE("step-2 envelopes") {
    const auto p = kernel_constants(1, 0.5);
    const auto zero = verify_ratio_step2(p, 0.0, 1e4, 2000);
    CHECK(zero.C.max_log == 0.0);
    CHECK(zero.D.max_log == 0.0);
    const auto r = verify_ratio_step2(p, 50.0, 1e4, 5000);
    CHECK(r.pass());
    CHECK(r.F.max_ratio() <= r.F_reference);
    CHECK(r.F_reference == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(verify_ratio_step2(p, 1e8, 1e4, 10), DomainError);
}

TEST_CASE("property: sampling is deterministic in the seed") {
    const V x{0.5};
    const auto a = verify_ratio_c2_c3(x, 1.0, 500.0, 300, 99);
    const auto b = verify_ratio_c2_c3(x, 1.0, 500.0, 300, 99);
    CHECK(a.c2.max_log == b.c2.max_log);
    CHECK(a.c3.max_log == b.c3.max_log);
}
