#include "masterop/regions.hpp"

#include "masterop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace masterop {

namespace {

double dist2(std::span<const double> a, std::span<const double> b) {
    double r = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) r += (a[k] - b[k]) * (a[k] - b[k]);
    return r;
}

double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

void require_past(double tau, double t) {
    if (!(tau < t)) throw DomainError("region classification needs tau < t");
}

class Sampler {
public:
    Sampler(int n, std::uint64_t seed) : n_(n), rng_(seed) {}

    double unit() { return uni_(rng_); }
    /// Log-uniform in [lo, hi].
    double log_uniform(double lo, double hi) { return lo * std::exp(unit() * std::log(hi / lo)); }

    std::vector<double> direction() {
        std::vector<double> d(n_);
        double r = 0.0;
        do {
            r = 0.0;
            for (auto& c : d) {
                c = gauss_(rng_);
                r += c * c;
            }
        } while (r == 0.0);
        r = std::sqrt(r);
        for (auto& c : d) c /= r;
        return d;
    }

    std::vector<double> point(double radius) {
        auto d = direction();
        for (auto& c : d) c *= radius;
        return d;
    }

private:
    int n_;
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> uni_{0.0, 1.0};
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

} // namespace

bool ParabolicCylinder::contains(std::span<const double> y, double tau) const {
    double r2 = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double c = k < center.x.size() ? center.x[k] : 0.0;
        r2 += (y[k] - c) * (y[k] - c);
    }
    return std::sqrt(r2) <= R && std::abs(tau - center.t) <= R * R;
}

std::string to_string(Label l) {
    switch (l) {
    case Label::Interior: return "Interior";
    case Label::A: return "A";
    case Label::B: return "B";
    case Label::C: return "C";
    case Label::D: return "D";
    case Label::E: return "E";
    case Label::F: return "F";
    }
    return "?";
}

double region_delta(double R) { return std::pow(R, -1.0 / 3.0); }
double region_t0(double R) { return std::pow(R, 1.5); }

Sector sector_index(std::span<const double> y, std::span<const double> x) {
    if (y.size() != x.size() || y.empty()) throw DomainError("sector_index needs points of equal positive dimension");
    Sector s;
    double best = -1.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double d = std::abs(y[k] - x[k]);
        if (d > best) {
            best = d;
            s.j = static_cast<int>(k) + 1;
        }
    }
    if (best == 0.0) throw DomainError("sector_index needs y != x");
    s.sign = (y[s.j - 1] - x[s.j - 1]) >= 0.0 ? 1 : -1;
    return s;
}

RegionLabel classify_step1(std::span<const double> y, double tau, std::span<const double> x, double t, double R) {
    require_past(tau, t);
    if (!(R > 0.0)) throw DomainError("R must be positive");
    if (t > R * R) throw DomainError("classify_step1 needs t <= R^2");
    RegionLabel out;
    out.delta = region_delta(R);
    out.t0 = region_t0(R);
    const double ry = norm(y);
    if (ry <= R) {
        out.label = tau >= -R * R ? Label::Interior : Label::C;
        return out;
    }
    out.label = std::sqrt(dist2(y, x)) >= out.delta * (t - tau) ? Label::A : Label::B;
    const Sector sec = sector_index(y, x);
    out.sector_j = sec.j;
    out.sector_sign = sec.sign;
    return out;
}

RegionLabel classify_step2(std::span<const double> y, double tau, double t, double R) {
    require_past(tau, t);
    if (!(R > 0.0)) throw DomainError("R must be positive");
    RegionLabel out;
    out.delta = region_delta(R);
    out.t0 = region_t0(R);
    const double y2 = squared_norm(y);
    if (std::sqrt(y2) <= R) {
        if (tau >= -R * R) throw DomainError("classify_step2: point lies in the cylinder Q_R");
        out.label = Label::C;
        return out;
    }
    const double u = t - tau;
    if (u * u >= R * y2)
        out.label = Label::D;
    else if (tau <= -out.t0)
        out.label = Label::E;
    else
        out.label = Label::F;
    return out;
}

namespace membership {

bool interior(std::span<const double> y, double tau, double R) {
    ParabolicCylinder q{R, {}};
    return q.contains(y, tau);
}
bool step1_A(std::span<const double> y, double tau, std::span<const double> x, double t, double R) {
    return norm(y) > R && std::sqrt(dist2(y, x)) >= region_delta(R) * (t - tau);
}
bool step1_B(std::span<const double> y, double tau, std::span<const double> x, double t, double R) {
    return norm(y) > R && std::sqrt(dist2(y, x)) < region_delta(R) * (t - tau);
}
bool region_C(std::span<const double> y, double tau, double R) { return norm(y) <= R && tau < -R * R; }
bool step2_D(std::span<const double> y, double tau, double t, double R) {
    return norm(y) > R && (t - tau) * (t - tau) >= R * squared_norm(y);
}
bool step2_E(std::span<const double> y, double tau, double t, double R) {
    return norm(y) > R && tau <= -region_t0(R) && (t - tau) * (t - tau) < R * squared_norm(y);
}
bool step2_F(std::span<const double> y, double tau, double t, double R) {
    return norm(y) > R && tau > -region_t0(R) && tau < t && !((t - tau) * (t - tau) >= R * squared_norm(y));
}

} // namespace membership

namespace {

/// Mixed exterior/interior sample around the cylinder: radii spread from 1e-3 R to 10 R,
/// past offsets from 1e-3 to 100 R^2, a tenth of them snapped to a boundary.
void sample_point(Sampler& smp, double R, double t, std::vector<double>& y, double& tau, int kind) {
    const double r = smp.log_uniform(1e-3 * R, 10.0 * R);
    y = smp.point(r);
    tau = t - smp.log_uniform(1e-3, 100.0 * R * R);
    switch (kind) {
    case 0: y = smp.point(R); break;
    case 1: tau = -R * R; break;
    case 2: tau = -region_t0(R); break;
    default: break;
    }
    if (!(tau < t)) tau = t - 1.0;
}

} // namespace

PartitionReport verify_partition_step1(std::span<const double> x, double t, double R, std::size_t samples,
                                       std::uint64_t seed) {
    if (samples < 1) throw DomainError("samples must be >= 1");
    const int n = static_cast<int>(x.size());
    Sampler smp(n, seed);
    PartitionReport rep;
    std::vector<double> y;
    double tau = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const int kind = (i % 10 == 0) ? static_cast<int>((i / 10) % 4) : 9;
        sample_point(smp, R, t, y, tau, kind);
        if (kind == 3) {
            // Snap to |y - x| = delta (t - tau).
            const double d = std::sqrt(dist2(y, x));
            tau = t - d / region_delta(R);
        }
        const bool in[4] = {membership::interior(y, tau, R), membership::step1_A(y, tau, x, t, R),
                            membership::step1_B(y, tau, x, t, R), membership::region_C(y, tau, R)};
        const Label names[4] = {Label::Interior, Label::A, Label::B, Label::C};
        int hits = 0, which = -1;
        for (int k = 0; k < 4; ++k)
            if (in[k]) {
                ++hits;
                which = k;
            }
        ++rep.samples;
        if (hits == 0) ++rep.non_assignments;
        if (hits > 1) ++rep.double_assignments;
        const Label got = classify_step1(y, tau, x, t, R).label;
        ++rep.counts[static_cast<int>(got)];
        if (hits == 1 && got != names[which]) ++rep.mismatches;
    }
    return rep;
}

PartitionReport verify_partition_step2(int n, double t, double R, std::size_t samples, std::uint64_t seed) {
    if (samples < 1) throw DomainError("samples must be >= 1");
    Sampler smp(n, seed);
    PartitionReport rep;
    std::vector<double> y;
    double tau = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const int kind = (i % 10 == 0) ? static_cast<int>((i / 10) % 4) : 9;
        sample_point(smp, R, t, y, tau, kind);
        if (kind == 3) {
            // Snap to (t - tau)^2 = R |y|^2.
            tau = t - std::sqrt(R * squared_norm(y));
        }
        const bool in[5] = {membership::interior(y, tau, R), membership::region_C(y, tau, R),
                            membership::step2_D(y, tau, t, R), membership::step2_E(y, tau, t, R),
                            membership::step2_F(y, tau, t, R)};
        const Label names[5] = {Label::Interior, Label::C, Label::D, Label::E, Label::F};
        int hits = 0, which = -1;
        for (int k = 0; k < 5; ++k)
            if (in[k]) {
                ++hits;
                which = k;
            }
        ++rep.samples;
        if (hits == 0) ++rep.non_assignments;
        if (hits > 1) ++rep.double_assignments;
        const Label got = membership::interior(y, tau, R) ? Label::Interior : classify_step2(y, tau, t, R).label;
        ++rep.counts[static_cast<int>(got)];
        if (hits == 1 && got != names[which]) ++rep.mismatches;
    }
    return rep;
}

double RatioReport::max_ratio() const { return std::exp(max_log); }
double RatioReport::envelope() const { return std::exp(envelope_log); }

namespace {

void close(RatioReport& r) {
    if (r.samples == 0) {
        r.degenerate = true;
        r.pass = false;
        if (r.note.empty()) r.note = "no samples";
        return;
    }
    r.pass = r.max_log <= r.envelope_log + 1e-12 * std::max(1.0, std::abs(r.envelope_log));
}

void require_inner(std::span<const double> x, double R) {
    if (!(R > 0.0)) throw DomainError("R must be positive");
    if (norm(x) > R / 3.0) throw DomainError("ratio checks need |x| <= R/3");
}

} // namespace

RatioReport verify_ratio_c1(std::span<const double> x, double t, double R, std::size_t samples, std::uint64_t seed) {
    require_inner(x, R);
    const int n = static_cast<int>(x.size());
    const double delta = region_delta(R);
    RatioReport rep;
    rep.region = "A";
    rep.constant = 1.0 / (2.0 * std::sqrt(double(n))) - 3.0 * delta / 8.0;
    rep.envelope_log = -rep.constant / delta;
    if (rep.constant <= 0.0 || R <= 3.0 * std::sqrt(std::abs(t))) {
        rep.degenerate = true;
        rep.note = "R too small for the c1 envelope";
        return rep;
    }
    Sampler smp(n, seed);
    std::vector<double> dx1(n), dx2(n);
    for (std::size_t i = 0; i < samples; ++i) {
        const auto y = smp.point(smp.log_uniform(R, 4.0 * R) * (1.0 + 1e-12));
        const double d = std::sqrt(dist2(y, x));
        const double frac = (i % 10 == 0) ? 1.0 : smp.log_uniform(1e-3, 1.0);
        const double a = frac * d / delta;
        if (!(a > 0.0)) continue;
        const Sector sec = sector_index(y, x);
        for (int k = 0; k < n; ++k) {
            dx1[k] = x[k] - y[k];
            dx2[k] = dx1[k];
        }
        dx2[sec.j - 1] += sec.sign / (delta * delta);
        rep.max_log = std::max(rep.max_log, kernel_log_ratio(dx1, dx2, a));
        ++rep.samples;
    }
    close(rep);
    return rep;
}

C1Sweep verify_ratio_c1_sweep(std::span<const double> x, double t, const std::vector<double>& R_list,
                              std::size_t samples, std::uint64_t seed) {
    C1Sweep sw;
    sw.R = R_list;
    for (double R : R_list) sw.reports.push_back(verify_ratio_c1(x, t, R, samples, seed));
    sw.strictly_decreasing = !sw.reports.empty();
    for (std::size_t i = 1; i < sw.reports.size(); ++i)
        if (!(sw.reports[i].max_log < sw.reports[i - 1].max_log)) sw.strictly_decreasing = false;
    return sw;
}

C2C3Report verify_ratio_c2_c3(std::span<const double> x, double t, double R, std::size_t samples, std::uint64_t seed) {
    require_inner(x, R);
    if (std::abs(t) > R * R / 9.0) throw DomainError("ratio checks need |t| <= R^2/9");
    const int n = static_cast<int>(x.size());
    const double delta = region_delta(R);
    const double xn = norm(x);
    C2C3Report rep;
    rep.c2.region = "B";
    rep.c2.constant = delta;
    rep.c2.envelope_log = delta * (xn / 2.0 + 0.75 * xn * xn);
    rep.c3.region = "C";
    rep.c3.constant = (2.0 + xn / R) / (4.0 * (1.0 + t / (R * R)));
    rep.c3.envelope_log = rep.c3.constant * xn / R;
    Sampler smp(n, seed);
    std::vector<double> dx1(n), dx2(n);
    auto log_ratio = [&](const std::vector<double>& y, double a) {
        for (int k = 0; k < n; ++k) {
            dx1[k] = x[k] - y[k];
            dx2[k] = -y[k];
        }
        return std::abs(kernel_log_ratio(dx1, dx2, a));
    };
    for (std::size_t i = 0; i < samples; ++i) {
        const auto y = smp.point(smp.log_uniform(R, 4.0 * R) * (1.0 + 1e-12));
        const double d = std::sqrt(dist2(y, x));
        const double a = (d / delta) * ((i % 10 == 0) ? 1.0 + 1e-12 : smp.log_uniform(1.0 + 1e-12, 1e3));
        rep.c2.max_log = std::max(rep.c2.max_log, log_ratio(y, a));
        ++rep.c2.samples;
    }
    for (std::size_t i = 0; i < samples; ++i) {
        const double r = (i % 10 == 0) ? R : R * std::pow(smp.unit(), 1.0 / n);
        const auto y = smp.point(r);
        const double tau = -R * R * ((i % 10 == 1) ? 1.0 + 1e-12 : smp.log_uniform(1.0 + 1e-12, 1e3));
        rep.c3.max_log = std::max(rep.c3.max_log, log_ratio(y, t - tau));
        ++rep.c3.samples;
    }
    if (xn == 0.0) {
        // Identical kernel arguments: every log ratio is exactly zero.
        rep.c2.envelope_log = 0.0;
        rep.c3.envelope_log = 0.0;
    }
    close(rep.c2);
    close(rep.c3);
    return rep;
}

Step2Report verify_ratio_step2(const KernelParams& p, double t, double R, std::size_t samples, std::uint64_t seed) {
    if (!(R > 0.0)) throw DomainError("R must be positive");
    if (std::abs(t) > R * R / 9.0) throw DomainError("Step-2 ratio checks need |t| <= R^2/9");
    const int n = p.n;
    const double pw = p.time_power();
    const double t0 = region_t0(R);
    const double at = std::abs(t);
    Step2Report rep;
    rep.C.region = "C";
    rep.D.region = "D";
    rep.E.region = "E";
    rep.F.region = "F";
    rep.F_reference = 10.0 / std::sqrt(R);
    rep.E_reference = 10.0 * std::exp(-std::sqrt(R));

    rep.C.constant = pw;
    rep.C.envelope_log = -pw * std::log1p(-at / (R * R)) + at / (4.0 * (R * R - at));
    const double m = t0 - t;
    rep.D.constant = pw;
    if (m > at) {
        rep.D.envelope_log = -pw * std::log1p(-at / m) + at * (1.0 + at / m) / (4.0 * R);
    } else {
        rep.D.degenerate = true;
        rep.D.note = "t too close to R^{3/2} for the D envelope";
    }
    const double umin = t + t0;
    rep.E.constant = pw;
    rep.E.envelope_log = pw * std::log1p(t0 / umin) - umin * t0 / (4.0 * R * (umin + t0));
    const double umax = t + t0;
    rep.F.constant = pw;
    rep.F.envelope_log = std::max(pw * std::log(16.0 * pw / std::exp(1.0)) - 0.5 * pw * std::log(R),
                                  pw * std::log(2.0) - R * R * t0 / (4.0 * umax * (umax + t0)));

    Sampler smp(n, seed);
    std::vector<double> negy(n);
    auto lk = [&](const std::vector<double>& y, double dt) {
        for (int k = 0; k < n; ++k) negy[k] = -y[k];
        return log_kernel(negy, dt, p);
    };
    for (std::size_t i = 0; i < samples; ++i) {
        // C_R
        {
            const auto y = smp.point(R * std::pow(smp.unit(), 1.0 / n));
            const double tau = -R * R * smp.log_uniform(1.0 + 1e-12, 1e3);
            if (tau < std::min(0.0, t)) {
                rep.C.max_log = std::max(rep.C.max_log, std::abs(lk(y, -tau) - lk(y, t - tau)));
                ++rep.C.samples;
            }
        }
        // D_R, past of 0 only
        if (!rep.D.degenerate) {
            const auto y = smp.point(smp.log_uniform(R, 10.0 * R) * (1.0 + 1e-12));
            const double u = std::sqrt(R * squared_norm(y)) * ((i % 10 == 0) ? 1.0 : smp.log_uniform(1.0, 100.0));
            const double tau = t - u;
            if (tau < 0.0 && membership::step2_D(y, tau, t, R)) {
                rep.D.max_log = std::max(rep.D.max_log, std::abs(lk(y, -tau) - lk(y, t - tau)));
                ++rep.D.samples;
            }
        }
        // E_R
        {
            const double tau = -t0 * ((i % 10 == 0) ? 1.0 : smp.log_uniform(1.0, 1e3));
            const double u = t - tau;
            const double rmin = std::max(R, u / std::sqrt(R));
            const auto y = smp.point(rmin * ((i % 10 == 0) ? 1.0 + 1e-12 : smp.log_uniform(1.0 + 1e-12, 10.0)));
            if (u > 0.0 && membership::step2_E(y, tau, t, R)) {
                rep.E.max_log = std::max(rep.E.max_log, lk(y, u) - lk(y, u + t0));
                ++rep.E.samples;
            }
        }
        // F_R
        {
            const double u = (t + t0) * smp.log_uniform(1e-6, 1.0);
            const double tau = t - u;
            const auto y = smp.point(smp.log_uniform(R, 10.0 * R) * (1.0 + 1e-12));
            if (membership::step2_F(y, tau, t, R)) {
                rep.F.max_log = std::max(rep.F.max_log, lk(y, u) - lk(y, u + t0));
                ++rep.F.samples;
            }
        }
    }
    close(rep.C);
    if (!rep.D.degenerate) close(rep.D);
    close(rep.E);
    close(rep.F);
    return rep;
}

} // namespace masterop
