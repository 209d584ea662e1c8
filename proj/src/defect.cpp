#include "masterop/defect.hpp"

#include "masterop/errors.hpp"
#include "masterop/operators.hpp"
#include "masterop/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace masterop {

namespace {

double probe_bound(const SpaceTimePoint& at) {
    return 3.0 * std::max(std::sqrt(std::abs(at.t)), std::sqrt(squared_norm(at.x)));
}

std::string point_text(const SpaceTimePoint& at) {
    std::ostringstream os;
    os << "(";
    for (std::size_t k = 0; k < at.x.size(); ++k) os << (k ? "," : "") << at.x[k];
    os << "; " << at.t << ")";
    return os.str();
}

} // namespace

QuadResult tail_functional(const FunctionHandle& u, const SpaceTimePoint& at, double R, const KernelParams& p,
                           const QuadSpec& q) {
    const double bound = probe_bound(at);
    if (!(R > bound))
        throw DomainError("tail functional needs R > 3 max(sqrt|t|, |x|) = " + std::to_string(bound));
    return integrate_exterior(u, at, R, p, q);
}

std::vector<SpaceTimePoint> default_probes(int n, double R_max) {
    const double rho = R_max / 3.0;
    const double xs[5] = {0.0, 0.25, -0.25, 0.125, -0.125};
    const double ts[5] = {0.0, 0.5, 0.25, -0.5, -0.25};
    std::vector<SpaceTimePoint> out;
    for (int i = 0; i < 5; ++i) {
        SpaceTimePoint pt;
        pt.x.assign(n, 0.0);
        pt.x[0] = xs[i] * rho;
        pt.t = ts[i] * (rho / 4.0) * (rho / 4.0);
        out.push_back(pt);
    }
    return out;
}

DefectReport defect_estimate(const Family& family, const FunctionHandle& limit_u,
                             const std::vector<SpaceTimePoint>& probes, const std::vector<double>& R_schedule,
                             const std::vector<int>& j_schedule, const KernelParams& p, const QuadSpec& q,
                             const DefectOptions& opt) {
    if (probes.empty() || R_schedule.empty() || j_schedule.empty())
        throw DomainError("defect_estimate needs probes and non-empty schedules");
    for (std::size_t i = 1; i < R_schedule.size(); ++i)
        if (!(R_schedule[i] > R_schedule[i - 1])) throw DomainError("R schedule must be strictly increasing");
    for (std::size_t i = 1; i < j_schedule.size(); ++i)
        if (!(j_schedule[i] > j_schedule[i - 1])) throw DomainError("j schedule must be strictly increasing");
    const double R_max = R_schedule.back();
    for (const auto& pr : probes)
        if (!(R_max > probe_bound(pr)))
            throw DomainError("probe " + point_text(pr) + " violates R > 3 max(sqrt|t|, |x|) at the largest R = " +
                              std::to_string(R_max));

    DefectReport rep;
    rep.probes = probes;
    const std::size_t nj = j_schedule.size(), nR = R_schedule.size(), nP = probes.size();

    std::vector<FunctionHandle> members(nj);
    for (std::size_t a = 0; a < nj; ++a) members[a] = family(j_schedule[a]);

    struct Cell {
        bool valid = false;
        QuadResult r;
    };
    std::vector<Cell> grid(nj * nR * nP);
    auto index = [&](std::size_t a, std::size_t b, std::size_t c) { return (a * nR + b) * nP + c; };
    parallel_for(grid.size(), opt.jobs, [&](std::size_t i) {
        const std::size_t c = i % nP, b = (i / nP) % nR, a = i / (nP * nR);
        if (!(R_schedule[b] > probe_bound(probes[c]))) return;
        grid[i].r = integrate_exterior(members[a], probes[c], R_schedule[b], p, q);
        grid[i].valid = true;
    });

    for (std::size_t a = 0; a < nj; ++a)
        for (std::size_t b = 0; b < nR; ++b)
            for (std::size_t c = 0; c < nP; ++c) {
                const Cell& cell = grid[index(a, b, c)];
                if (!cell.valid) continue;
                rep.samples.push_back({j_schedule[a], R_schedule[b], probes[c], cell.r.value, cell.r.err_estimate});
            }

    // Monotonicity in R per probe and j.
    rep.monotone_ok = true;
    for (std::size_t a = 0; a < nj; ++a)
        for (std::size_t c = 0; c < nP; ++c) {
            const Cell* prev = nullptr;
            for (std::size_t b = 0; b < nR; ++b) {
                const Cell& cell = grid[index(a, b, c)];
                if (!cell.valid) continue;
                if (prev && cell.r.value > prev->r.value + prev->r.err_estimate + cell.r.err_estimate + 1e-12) {
                    rep.monotone_ok = false;
                    rep.notes.push_back("F increases in R at probe " + point_text(probes[c]) +
                                        ", j = " + std::to_string(j_schedule[a]));
                }
                prev = &cell;
            }
        }

    // Double limit: j first, then R.
    rep.converged = true;
    for (std::size_t c = 0; c < nP; ++c) {
        std::vector<double> outer;
        bool ok = true;
        for (std::size_t b = 0; b < nR; ++b) {
            std::vector<double> inner;
            for (std::size_t a = 0; a < nj; ++a)
                if (grid[index(a, b, c)].valid) inner.push_back(grid[index(a, b, c)].r.value);
            if (inner.empty()) continue;
            if (inner.size() < 2 || std::abs(inner.back() - inner[inner.size() - 2]) > opt.tol) {
                ok = false;
                rep.notes.push_back("inner limit over j not stabilised at probe " + point_text(probes[c]) +
                                    ", R = " + std::to_string(R_schedule[b]));
                continue;
            }
            outer.push_back(inner.back());
        }
        if (ok && outer.size() >= 2 && std::abs(outer.back() - outer[outer.size() - 2]) > opt.tol) {
            ok = false;
            rep.notes.push_back("outer limit over R not stabilised at probe " + point_text(probes[c]));
        }
        if (ok && outer.size() == 1)
            rep.notes.push_back("only one admissible R at probe " + point_text(probes[c]));
        if (!ok || outer.empty()) {
            rep.b_per_probe.push_back(std::nullopt);
            rep.converged = false;
        } else {
            rep.b_per_probe.push_back(outer.back());
        }
    }
    if (rep.converged) {
        double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& b : rep.b_per_probe) {
            sum += *b;
            lo = std::min(lo, *b);
            hi = std::max(hi, *b);
        }
        rep.b_estimate = std::max(0.0, sum / double(nP));
        rep.b_spread = hi - lo;
    }

    // Uniform bound: M from the last j, N the first R after which sup F <= M + 1.
    double M = 0.0;
    for (std::size_t b = 0; b < nR; ++b)
        for (std::size_t c = 0; c < nP; ++c)
            if (grid[index(nj - 1, b, c)].valid) M = std::max(M, grid[index(nj - 1, b, c)].r.value);
    rep.liminf_bound_M = M;
    rep.N_threshold = R_schedule.back();
    for (std::size_t b0 = nR; b0-- > 0;) {
        bool holds = true;
        for (std::size_t a = 0; a < nj && holds; ++a)
            for (std::size_t c = 0; c < nP; ++c) {
                const Cell& cell = grid[index(a, b0, c)];
                // Probes in Q_{R/2}.
                if (!cell.valid) continue;
                if (std::sqrt(squared_norm(probes[c].x)) > R_schedule[b0] / 2.0 ||
                    std::abs(probes[c].t) > R_schedule[b0] * R_schedule[b0] / 4.0)
                    continue;
                if (cell.r.value > M + 1.0) {
                    holds = false;
                    break;
                }
            }
        if (!holds) break;
        rep.N_threshold = R_schedule[b0];
    }

    if (opt.consistency_j > 0) {
        const FunctionHandle uj = family(opt.consistency_j);
        rep.consistency.assign(nP, 0.0);
        parallel_for(nP, opt.jobs, [&](std::size_t c) {
            rep.consistency[c] = master_op(limit_u, probes[c], p, q).value - master_op(uj, probes[c], p, q).value;
        });
    }
    return rep;
}

namespace {

/// Panels on [a, b] split at dyadic magnitudes, each cut to at most 16 pieces of width >= feature/2.
std::vector<std::pair<double, double>> graded_segments(double a, double b, double feature) {
    std::vector<double> cuts = {a, b};
    for (int k = -4; k < 60; ++k) {
        const double v = std::ldexp(1.0, k);
        if (v > a && v < b) cuts.push_back(v);
        if (-v > a && -v < b) cuts.push_back(-v);
    }
    if (0.0 > a && 0.0 < b) cuts.push_back(0.0);
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double len = cuts[i + 1] - cuts[i];
        if (!(len > 0.0)) continue;
        const int k = std::clamp(static_cast<int>(std::ceil(len / (0.5 * feature))), 1, 16);
        for (int m = 0; m < k; ++m)
            out.push_back({cuts[i] + len * m / k, m + 1 == k ? cuts[i + 1] : cuts[i] + len * (m + 1) / k});
    }
    return out;
}

/// Integral of f(x, t) over {ra < |x| <= rb} x [ta, tb].
template <class F>
double shell_integral(int n, double ra, double rb, double ta, double tb, double fl, double ft, F&& f) {
    if (!(rb > ra) || !(tb > ta)) return 0.0;
    const auto& gl = cached_gauss_legendre(8);
    const auto tseg = graded_segments(ta, tb, ft);
    const auto rseg = graded_segments(ra, rb, fl);
    std::vector<double> x(n);
    auto time_line = [&](auto&& at_time) {
        double s = 0.0;
        for (auto [lo, hi] : tseg) {
            const double h = 0.5 * (hi - lo), m = 0.5 * (hi + lo);
            for (std::size_t i = 0; i < gl.nodes.size(); ++i) s += h * gl.weights[i] * at_time(m + h * gl.nodes[i]);
        }
        return s;
    };
    double total = 0.0;
    for (auto [lo, hi] : rseg) {
        const double h = 0.5 * (hi - lo), m = 0.5 * (hi + lo);
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double r = m + h * gl.nodes[i];
            double ang = 0.0;
            if (n == 1) {
                for (double sgn : {1.0, -1.0}) {
                    x[0] = sgn * r;
                    ang += time_line([&](double t) { return f(x, t); });
                }
            } else if (n == 2) {
                const int mph = 32;
                for (int k = 0; k < mph; ++k) {
                    const double ph = 2.0 * std::numbers::pi * (k + 0.5) / mph;
                    x[0] = r * std::cos(ph);
                    x[1] = r * std::sin(ph);
                    ang += (2.0 * std::numbers::pi / mph) * time_line([&](double t) { return f(x, t); }) * r;
                }
            } else {
                const auto& gm = cached_gauss_legendre(8);
                const int mph = 16;
                for (std::size_t a = 0; a < gm.nodes.size(); ++a) {
                    const double mu = gm.nodes[a], st = std::sqrt(1.0 - mu * mu);
                    for (int k = 0; k < mph; ++k) {
                        const double ph = 2.0 * std::numbers::pi * (k + 0.5) / mph;
                        x[0] = r * st * std::cos(ph);
                        x[1] = r * st * std::sin(ph);
                        x[2] = r * mu;
                        ang += gm.weights[a] * (2.0 * std::numbers::pi / mph) *
                               time_line([&](double t) { return f(x, t); }) * r * r;
                    }
                }
            }
            total += h * gl.weights[i] * ang;
        }
    }
    return total;
}

} // namespace

WeightDiagnostic weight_diagnostic(const FunctionHandle& u, const std::vector<double>& truncation_radii,
                                   const KernelParams& p) {
    for (std::size_t i = 0; i < truncation_radii.size(); ++i)
        if (!(truncation_radii[i] > 0.0) || (i > 0 && !(truncation_radii[i] > truncation_radii[i - 1])))
            throw DomainError("truncation radii must be positive and increasing");
    const int n = p.n;
    const double qx = p.space_power(), qt = p.time_power();
    const double fl = u.feature_length > 0 ? u.feature_length : 1.0;
    const double ft = std::isfinite(u.feature_time) && u.feature_time > 0 ? u.feature_time : 1.0;
    auto w2ss = [&](std::span<const double> x, double t) {
        const double v = std::abs(u(x, t));
        if (v == 0.0) return 0.0;
        return v / (1.0 + std::pow(std::sqrt(squared_norm(x)), qx) + std::pow(std::abs(t), qt));
    };
    auto wL = [&](std::span<const double> x, double tau) {
        const double v = std::abs(u(x, tau));
        if (v == 0.0 || !(tau < 0.0)) return 0.0;
        const double a = -tau;
        return v * std::exp(-squared_norm(x) / (4.0 * a)) / (1.0 + std::pow(a, qt));
    };
    WeightDiagnostic out;
    double prev = 0.0;
    for (double r : truncation_radii) {
        const double r2 = r * r, p2 = prev * prev;
        double inc = shell_integral(n, prev, r, -r2, r2, fl, ft, w2ss);
        inc += shell_integral(n, 0.0, prev, p2, r2, fl, ft, w2ss);
        inc += shell_integral(n, 0.0, prev, -r2, -p2, fl, ft, w2ss);
        out.L2ss_tail.push_back(inc);
        double incL = shell_integral(n, prev, r, -r2, 0.0, fl, ft, wL);
        incL += shell_integral(n, 0.0, prev, -r2, -p2, fl, ft, wL);
        out.L_tail.push_back(incL);
        prev = r;
    }
    return out;
}

} // namespace masterop
