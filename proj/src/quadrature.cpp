#include "masterop/quadrature.hpp"

#include "masterop/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

namespace masterop {

namespace {

constexpr double kPi = std::numbers::pi;

QuadratureRule compute_gauss_hermite(int n) {
    // Golub-Welsch eigenvalues as seeds, then Newton on the orthonormal recurrence
    // so that the weights keep full relative accuracy in the tails.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(0.5 * k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericError("gauss_hermite_nodes: eigenvalue iteration failed");

    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const double pim4 = std::pow(kPi, -0.25);
    for (int i = 0; i < n; ++i) {
        double z = eig.eigenvalues()[i];
        double pp = 0.0;
        for (int it = 0; it < 8; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (k + 1)) * p2 - std::sqrt(double(k) / (k + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        rule.nodes[i] = z;
        rule.weights[i] = 2.0 / (pp * pp);
    }
    // exact symmetry
    for (int i = 0; i < n / 2; ++i) {
        const double z = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

QuadratureRule compute_gauss_legendre(int n) {
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * k + 1.0) * z * p2 - k * p3) / (k + 1);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) <= 1e-16) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    if (n % 2 == 1) rule.nodes[m - 1] = 0.0;
    return rule;
}

template <class Compute>
const QuadratureRule& cached(std::map<int, std::unique_ptr<QuadratureRule>>& table, std::mutex& mu, int order,
                             Compute compute) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = table.find(order);
    if (it == table.end()) it = table.emplace(order, std::make_unique<QuadratureRule>(compute(order))).first;
    return *it->second;
}

/// Throws when |g(a)| a^{-s} grows along a geometric sweep of [lo, hi], before any panel sees an overflow.
template <class G>
void check_past_growth(G&& g, double lo, double hi, double ratio, double s, const char* what) {
    const double ref = std::abs(g(lo)) * std::pow(lo, -s);
    for (double a = lo * ratio; a <= hi * (1.0 + 1e-12); a *= ratio) {
        const double v = g(a);
        const double gv = std::abs(v) * std::pow(a, -s);
        if (!std::isfinite(v) || (gv > 2.0 * ref && gv > 1e-300))
            throw IntegrabilityError(std::string("past growth of u makes the ") + what + " integral divergent");
    }
}

} // namespace

QuadratureRule gauss_hermite_nodes(int order) {
    if (order < 1) throw DomainError("gauss_hermite_nodes: order must be >= 1");
    if (order > 200) throw UnsupportedError("gauss_hermite_nodes: order > 200 is not supported");
    if (order == 1) return {{0.0}, {std::sqrt(kPi)}};
    return compute_gauss_hermite(order);
}

QuadratureRule gauss_legendre_nodes(int order) {
    if (order < 1) throw DomainError("gauss_legendre_nodes: order must be >= 1");
    if (order == 1) return {{0.0}, {2.0}};
    return compute_gauss_legendre(order);
}

const QuadratureRule& cached_gauss_hermite(int order) {
    static std::map<int, std::unique_ptr<QuadratureRule>> table;
    static std::mutex mu;
    if (order < 1) throw DomainError("gauss_hermite_nodes: order must be >= 1");
    if (order > 200) throw UnsupportedError("gauss_hermite_nodes: order > 200 is not supported");
    return cached(table, mu, order, gauss_hermite_nodes);
}

const QuadratureRule& cached_gauss_legendre(int order) {
    static std::map<int, std::unique_ptr<QuadratureRule>> table;
    static std::mutex mu;
    if (order < 1) throw DomainError("gauss_legendre_nodes: order must be >= 1");
    return cached(table, mu, order, gauss_legendre_nodes);
}

void validate(const QuadSpec& q) {
    if (q.gh_order < 1) throw DomainError("QuadSpec: gh_order must be >= 1");
    if (q.gh_order > 200) throw UnsupportedError("QuadSpec: gh_order > 200 is not supported");
    if (q.panels_per_decade < 1) throw DomainError("QuadSpec: panels_per_decade must be >= 1");
    if (!(q.grading > 0.0 && q.grading < 1.0)) throw DomainError("QuadSpec: grading must lie in (0,1)");
    if (!(q.a_min > 0.0)) throw DomainError("QuadSpec: a_min must be positive");
    if (q.horizon && !(*q.horizon > q.a_min)) throw DomainError("QuadSpec: horizon must exceed a_min");
    if (q.radial_horizon && !(*q.radial_horizon > 0.0)) throw DomainError("QuadSpec: radial_horizon must be positive");
    if (q.gl_order < 2) throw DomainError("QuadSpec: gl_order must be >= 2");
    if (!(q.rel_tol > 0.0)) throw DomainError("QuadSpec: rel_tol must be positive");
}

std::vector<TimePanel> graded_time_mesh(double horizon, double grading, double a_min) {
    if (!(grading > 0.0 && grading < 1.0) || !(a_min > 0.0) || !(horizon > a_min) || !std::isfinite(horizon))
        throw DomainError("graded_time_mesh: need horizon > a_min > 0 and 0 < grading < 1");
    std::vector<TimePanel> panels;
    double hi = horizon;
    while (hi > a_min) {
        const double lo = hi * grading;
        panels.push_back({lo, hi});
        hi = lo;
    }
    return panels;
}

namespace {

// Half-width of the Gaussian window in units of 2 sqrt(a); e^{-Z^2} is below the working tolerance.
constexpr double kWindow[3] = {6.2, 6.0, 5.0};
// Highest Gauss-Hermite order used when unsupported functions are averaged with a pure GH rule.
constexpr int kGhCap[3] = {200, 200, 64};
constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Region { All, Ball, Exterior };

struct Accum {
    double value = 0.0;
    double err = 0.0;
    double abs_sum = 0.0;
};

/// Adds cuts at every point of `cuts` strictly inside a panel.
void split_panels(std::vector<TimePanel>& panels, const std::vector<double>& cuts) {
    std::vector<TimePanel> out;
    out.reserve(panels.size() + cuts.size());
    for (const auto& pnl : panels) {
        std::vector<double> inner;
        for (double c : cuts)
            if (c > pnl.lo && c < pnl.hi) inner.push_back(c);
        std::sort(inner.begin(), inner.end());
        double lo = pnl.lo;
        for (double c : inner) {
            out.push_back({lo, c});
            lo = c;
        }
        out.push_back({lo, pnl.hi});
    }
    panels.swap(out);
}

/// Subdivides the parts of panels inside [zlo, zhi] to width <= width.
void refine_panels(std::vector<TimePanel>& panels, double zlo, double zhi, double width) {
    if (!(width > 0.0) || !(zhi > zlo)) return;
    split_panels(panels, {zlo, zhi});
    std::vector<TimePanel> out;
    for (const auto& pnl : panels) {
        const bool inside = pnl.lo >= zlo && pnl.hi <= zhi;
        const double len = pnl.hi - pnl.lo;
        if (!inside || len <= width || !std::isfinite(len)) {
            out.push_back(pnl);
            continue;
        }
        const auto k = static_cast<std::size_t>(std::ceil(len / width));
        for (std::size_t i = 0; i < k; ++i)
            out.push_back({pnl.lo + len * double(i) / double(k), i + 1 == k ? pnl.hi : pnl.lo + len * double(i + 1) / double(k)});
    }
    panels.swap(out);
}

/// Geometric panels from lo upwards to hi with the given ratio (> 1).
std::vector<TimePanel> upward_panels(double lo, double hi, double ratio) {
    std::vector<TimePanel> panels;
    double a = lo;
    while (a < hi) {
        double b = a * ratio;
        if (b > hi || (hi - b) < 1e-9 * hi) b = hi;
        panels.push_back({a, b});
        a = b;
    }
    return panels;
}

/// Geometric panels from hi downwards, stopping at lo exactly.
std::vector<TimePanel> downward_panels(double lo, double hi, double grading) {
    std::vector<TimePanel> panels;
    double b = hi;
    while (b > lo) {
        double a = b * grading;
        if (a < lo || (a - lo) < 1e-9 * b) a = lo;
        panels.push_back({a, b});
        b = a;
    }
    return panels;
}

std::string panel_text(double lo, double hi) {
    std::ostringstream os;
    os.precision(6);
    os << "(" << lo << ", " << hi << "]";
    return os.str();
}

/// Integrates f over each panel with GL m and m/2; the difference of the two is the error estimate.
template <class F>
void integrate_panels(const std::vector<TimePanel>& panels, int m, F&& f, Accum& acc, std::vector<PanelContribution>* trace,
                      double sign = 1.0) {
    const auto& hi_rule = cached_gauss_legendre(m);
    const auto& lo_rule = cached_gauss_legendre(std::max(2, m / 2));
    for (const auto& pnl : panels) {
        if (!(pnl.hi > pnl.lo)) continue;
        const double half = 0.5 * (pnl.hi - pnl.lo), mid = 0.5 * (pnl.hi + pnl.lo);
        double qh = 0.0, ql = 0.0, qa = 0.0;
        for (std::size_t i = 0; i < hi_rule.nodes.size(); ++i) {
            const double v = f(mid + half * hi_rule.nodes[i]);
            if (!std::isfinite(v)) throw NumericError("non-finite integrand on time panel " + panel_text(pnl.lo, pnl.hi));
            qh += hi_rule.weights[i] * v;
            qa += hi_rule.weights[i] * std::abs(v);
        }
        for (std::size_t i = 0; i < lo_rule.nodes.size(); ++i) {
            const double v = f(mid + half * lo_rule.nodes[i]);
            if (!std::isfinite(v)) throw NumericError("non-finite integrand on time panel " + panel_text(pnl.lo, pnl.hi));
            ql += lo_rule.weights[i] * v;
        }
        qh *= half;
        ql *= half;
        acc.value += sign * qh;
        acc.err += std::abs(qh - ql);
        acc.abs_sum += half * qa;
        if (trace) trace->push_back({pnl.lo, pnl.hi, sign * qh});
    }
}

/// Evaluation context for Gaussian averages centred at a point x.
class Averager {
public:
    Averager(const FunctionHandle& u, std::span<const double> x, const QuadSpec& q)
        : u_(u), x_(x.begin(), x.end()), n_(static_cast<int>(x.size())), q_(q), y_(x.size()) {
        rho_ = (u.support && u.support->spatially_bounded()) ? u.support->radius : kInf;
        xnorm_ = std::sqrt(squared_norm(x_));
        ell_ = u.feature_length > 0 ? u.feature_length : 1.0;
    }

    std::size_t evals = 0;
    int dim() const { return n_; }
    double radius() const { return rho_; }
    double xnorm() const { return xnorm_; }

    double eval(std::span<const double> y, double tau) {
        ++evals;
        return u_(y, tau);
    }

    /// Mean of u(x,t) - u(x + 2 sqrt(a) z, t - a) under e^{-|z|^2}/pi^{n/2} by tensor GH.
    double gh_difference(double u0, double a, double tau, int order) {
        const auto& rule = cached_gauss_hermite(order);
        const int q = static_cast<int>(rule.nodes.size());
        const double scale = 2.0 * std::sqrt(a);
        std::vector<int> idx(n_, 0);
        double sum = 0.0;
        while (true) {
            double w = 1.0;
            for (int k = 0; k < n_; ++k) {
                y_[k] = x_[k] + scale * rule.nodes[idx[k]];
                w *= rule.weights[idx[k]];
            }
            sum += w * (u0 - eval(y_, tau));
            int k = 0;
            while (k < n_ && ++idx[k] == q) idx[k++] = 0;
            if (k == n_) break;
        }
        return sum / std::pow(kPi, 0.5 * n_);
    }

    /// Integral of g(y) against the normalized heat kernel G_a(x - y) over the region
    /// (|y| <= R for Ball, |y| > R for Exterior) intersected with the support ball.
    template <class G>
    double average(double a, Region region, double R, G&& g) {
        const double W = 2.0 * std::sqrt(a) * kWindow[n_ - 1];
        double r_lo = 0.0, r_hi = rho_;
        if (region == Region::Ball) r_hi = std::min(r_hi, R);
        if (region == Region::Exterior) r_lo = R;
        r_lo = std::max(r_lo, xnorm_ - W);
        r_hi = std::min(r_hi, xnorm_ + W);
        if (!(r_hi > r_lo)) return 0.0;
        const double h = std::min(0.5 * ell_, std::sqrt(a));
        const double inv4a = 1.0 / (4.0 * a);
        const double norm = std::pow(4.0 * kPi * a, -0.5 * n_);
        const auto& gl = cached_gauss_legendre(q_.gl_order);
        if (n_ == 1) {
            std::vector<std::pair<double, double>> pieces;
            if (r_lo <= 0.0) {
                pieces.push_back({-r_hi, r_hi});
            } else {
                pieces.push_back({-r_hi, -r_lo});
                pieces.push_back({r_lo, r_hi});
            }
            double sum = 0.0;
            for (auto [lo, hi] : pieces) {
                lo = std::max(lo, x_[0] - W);
                hi = std::min(hi, x_[0] + W);
                if (!(hi > lo)) continue;
                sum += line(lo, hi, h, gl, [&](double y) {
                    const double d = y - x_[0];
                    y_[0] = y;
                    return g(std::span<const double>(y_)) * std::exp(-d * d * inv4a);
                });
            }
            return norm * sum;
        }
        const double aw = std::min(0.5 * ell_, std::sqrt(a));
        if (n_ == 2) {
            return norm * line(r_lo, r_hi, h, gl, [&](double r) {
                const int m = std::clamp(static_cast<int>(std::ceil(2.0 * kPi * r / aw)), 16, 4096);
                double s = 0.0;
                for (int k = 0; k < m; ++k) {
                    const double ph = 2.0 * kPi * (k + 0.5) / m;
                    y_[0] = r * std::cos(ph);
                    y_[1] = r * std::sin(ph);
                    const double d2 = (y_[0] - x_[0]) * (y_[0] - x_[0]) + (y_[1] - x_[1]) * (y_[1] - x_[1]);
                    if (d2 * inv4a > 745.0) continue;
                    s += g(std::span<const double>(y_)) * std::exp(-d2 * inv4a);
                }
                return s * (2.0 * kPi / m) * r;
            });
        }
        return norm * line(r_lo, r_hi, h, gl, [&](double r) {
            const int mt = std::clamp(static_cast<int>(std::ceil(kPi * r / aw)), 1, 256);
            return line(0.0, kPi, kPi / mt, gl, [&](double th) {
                       const double st = std::sin(th), ct = std::cos(th);
                       const int m = std::clamp(static_cast<int>(std::ceil(2.0 * kPi * r * st / aw)), 8, 1024);
                       double s = 0.0;
                       for (int k = 0; k < m; ++k) {
                           const double ph = 2.0 * kPi * (k + 0.5) / m;
                           y_[0] = r * st * std::cos(ph);
                           y_[1] = r * st * std::sin(ph);
                           y_[2] = r * ct;
                           double d2 = 0.0;
                           for (int c = 0; c < 3; ++c) d2 += (y_[c] - x_[c]) * (y_[c] - x_[c]);
                           if (d2 * inv4a > 745.0) continue;
                           s += g(std::span<const double>(y_)) * std::exp(-d2 * inv4a);
                       }
                       return s * (2.0 * kPi / m) * st;
                   }) *
                   r * r;
        });
    }

    /// True when the Gaussian average over all space should use a raised-order GH rule
    /// instead of the composite rule (unsupported functions in n >= 2).
    bool pure_gh() const { return n_ >= 2 && !std::isfinite(rho_); }

    int gh_order_for(double a, double a_gh) const {
        const double factor = std::sqrt(std::max(1.0, a / a_gh));
        const int want = static_cast<int>(std::ceil(q_.gh_order * 1.5 * factor));
        return std::clamp(want, q_.gh_order, std::max(q_.gh_order, kGhCap[n_ - 1]));
    }

private:
    template <class F>
    static double line(double lo, double hi, double h, const QuadratureRule& gl, F&& f) {
        const double len = hi - lo;
        const int k = std::max(1, static_cast<int>(std::ceil(len / h)));
        double sum = 0.0;
        for (int i = 0; i < k; ++i) {
            const double a = lo + len * i / k, b = (i + 1 == k) ? hi : lo + len * (i + 1) / k;
            const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
            double s = 0.0;
            for (std::size_t j = 0; j < gl.nodes.size(); ++j) s += gl.weights[j] * f(mid + half * gl.nodes[j]);
            sum += half * s;
        }
        return sum;
    }

    const FunctionHandle& u_;
    std::vector<double> x_;
    int n_;
    const QuadSpec& q_;
    std::vector<double> y_;
    double rho_;
    double xnorm_;
    double ell_;
};

/// Range of a = t - tau on which u(., tau) can be nonzero.
struct TimeWindow {
    double a_lo = 0.0;
    double a_hi = kInf;
    bool contains(double a) const { return a >= a_lo && a <= a_hi; }
};

TimeWindow time_window(const FunctionHandle& u, double t) {
    TimeWindow w;
    if (!u.support) return w;
    w.a_lo = std::max(0.0, t - u.support->t_hi);
    w.a_hi = t - u.support->t_lo;
    return w;
}

/// Panel cuts from the time breaks and the time-support edges.
std::vector<double> time_cuts(const FunctionHandle& u, double t, const TimeWindow& w) {
    std::vector<double> cuts;
    for (double b : u.time_breaks)
        if (t - b > 0.0) cuts.push_back(t - b);
    if (w.a_lo > 0.0) cuts.push_back(w.a_lo);
    if (std::isfinite(w.a_hi) && w.a_hi > 0.0) cuts.push_back(w.a_hi);
    return cuts;
}

double smallest_lo(const std::vector<TimePanel>& panels) {
    double m = kInf;
    for (const auto& p : panels) m = std::min(m, p.lo);
    return m;
}

/// Contribution of (0, a1] for a difference D(a) ~ L0 a^p + L1 a^{2p} against a^{-1-sigma}.
/// For Holder data only a bound, D ~ a^{sigma + margin}, goes into the error.
void inner_correction(double a1, double D1, double D2, double p, double sigma, const FunctionHandle& u,
                      double holder_margin, Accum& acc) {
    if (u.smoothness == Smoothness::Holder) {
        acc.err += std::abs(D1) * std::pow(a1, -sigma) / holder_margin;
        return;
    }
    const double x1 = std::pow(a1, p), x2 = std::pow(2.0 * a1, p);
    const double l1 = D1 / x1, l2 = D2 / x2;
    const double L1 = (l2 - l1) / (x2 - x1);
    const double L0 = l1 - L1 * x1;
    const double lead = L0 * std::pow(a1, p - sigma) / (p - sigma);
    const double next = L1 * std::pow(a1, 2.0 * p - sigma) / (2.0 * p - sigma);
    acc.value += lead + next;
    acc.err += std::abs(next);
}

void check_point(const FunctionHandle& u, std::span<const double> x, int n) {
    if (static_cast<int>(x.size()) != n) throw DomainError("point dimension does not match the kernel dimension");
    if (u.dim > n) throw DomainError("function dimension exceeds the kernel dimension");
    for (double c : x)
        if (!std::isfinite(c)) throw DomainError("point coordinates must be finite");
}

double upward_ratio(const QuadSpec& q) { return std::pow(10.0, 1.0 / q.panels_per_decade); }

QuadResult finish(const Accum& acc, double K, std::size_t evals, bool flag, std::vector<PanelContribution> panels) {
    QuadResult r;
    r.value = K * acc.value;
    r.err_estimate = std::abs(K) * (acc.err + 1e-14 * acc.abs_sum);
    r.truncation_flag = flag;
    r.nodes_used = evals;
    r.panels = std::move(panels);
    for (auto& pc : r.panels) pc.value *= K;
    return r;
}

} // namespace

QuadResult integrate_difference(const FunctionHandle& u, const SpaceTimePoint& at, const KernelParams& p,
                                const QuadSpec& q) {
    validate(q);
    check_point(u, at.x, p.n);
    if (!std::isfinite(at.t)) throw DomainError("point time must be finite");
    if (u.dependence == Dependence::Constant) return {};
    const int n = p.n;
    const double s = p.s, t = at.t;
    const double K = p.master_constant() * std::pow(4.0 * kPi, 0.5 * n);
    Averager av(u, at.x, q);
    const double u0 = av.eval(at.x, t);
    const double ell = u.feature_length > 0 ? u.feature_length : 1.0;
    const double a_gh = ell * ell * q.gh_order / 20.0;
    const TimeWindow tw = time_window(u, t);
    const bool spatial = std::isfinite(av.radius());

    auto avg_all = [&](double a) {
        const double tau = t - a;
        if (!tw.contains(a)) return 0.0;
        if (u.dependence == Dependence::TimeOnly && a > a_gh) return av.eval(at.x, tau);
        if (a <= a_gh) return u0 - av.gh_difference(u0, a, tau, q.gh_order);
        if (av.pure_gh()) return u0 - av.gh_difference(u0, a, tau, av.gh_order_for(a, a_gh));
        return av.average(a, Region::All, 0.0, [&](std::span<const double> y) { return av.eval(y, tau); });
    };
    auto D = [&](double a) {
        const double tau = t - a;
        if (!tw.contains(a)) return u0;
        if (a <= a_gh) return av.gh_difference(u0, a, tau, q.gh_order);
        if (av.pure_gh()) return av.gh_difference(u0, a, tau, av.gh_order_for(a, a_gh));
        return u0 - av.average(a, Region::All, 0.0, [&](std::span<const double> y) { return av.eval(y, tau); });
    };

    if (tw.a_hi <= 0.0) {
        if (u0 == 0.0) return {};
        throw NumericError("difference integral diverges: u vanishes on the whole past but not at the point");
    }

    double T;
    if (q.horizon)
        T = *q.horizon;
    else if (std::isfinite(tw.a_hi))
        T = tw.a_hi;
    else if (spatial)
        T = std::max({4.0 * (av.xnorm() + av.radius()) * (av.xnorm() + av.radius()), 2.0 * a_gh, 1.0});
    else
        T = 64.0 * std::max({ell * ell, std::isfinite(u.feature_time) ? u.feature_time : 1.0, 1.0});
    bool exact_end = false;
    if (T >= tw.a_hi) {
        T = tw.a_hi;
        exact_end = true;
    }
    T = std::max(T, 4.0 * q.a_min);

    auto panels = graded_time_mesh(T, q.grading, q.a_min);
    auto cuts = time_cuts(u, t, tw);
    cuts.push_back(a_gh);
    split_panels(panels, cuts);
    if (std::isfinite(u.feature_time)) refine_panels(panels, 0.0, T, 0.5 * u.feature_time);

    Accum acc;
    std::vector<PanelContribution> trace;
    auto* tr = q.trace ? &trace : nullptr;
    integrate_panels(panels, q.gl_order, [&](double a) { return std::pow(a, -1.0 - s) * D(a); }, acc, tr);

    const double a1 = smallest_lo(panels);
    inner_correction(a1, D(a1), D(2.0 * a1), 1.0, s, u, 0.5 * u.epsilon.value_or(0.1), acc);

    const double uT = u0 * std::pow(T, -s) / s;
    acc.value += uT;
    acc.abs_sum += std::abs(uT);

    bool flag = false;
    auto frozen = [&](double c, double prev, double decay) {
        const double Ec = avg_all(c), Ep = avg_all(prev);
        const double w = std::pow(c, -s) / (s + decay);
        acc.value -= Ec * w;
        acc.err += std::abs(Ec - Ep) * w;
    };
    const double ratio = upward_ratio(q);
    if (!exact_end) {
        if (q.horizon) {
            frozen(T, 0.5 * T, 0.0);
            flag = true;
        } else if (spatial || u.dependence == Dependence::TimeOnly) {
            const double decay = spatial ? 0.5 * n : 0.0;
            double cap = T * std::pow(1e16, 1.0 / (s + decay));
            cap = std::min({cap, tw.a_hi, 1e300});
            if (u.dependence == Dependence::TimeOnly && !spatial) check_past_growth(avg_all, T, cap, ratio, s, "time");
            auto up = upward_panels(T, cap, ratio);
            split_panels(up, cuts);
            integrate_panels(up, q.gl_order, [&](double a) { return std::pow(a, -1.0 - s) * avg_all(a); }, acc, tr, -1.0);
            if (cap < tw.a_hi) frozen(cap, cap / ratio, decay);
        } else {
            frozen(T, 0.5 * T, 0.0);
            flag = true;
        }
    }
    return finish(acc, K, av.evals, flag, std::move(trace));
}

QuadResult integrate_exterior(const FunctionHandle& u, const SpaceTimePoint& at, double R, const KernelParams& p,
                              const QuadSpec& q) {
    validate(q);
    check_point(u, at.x, p.n);
    const int n = p.n;
    const double s = p.s, t = at.t;
    const double a_split = t + R * R;
    if (!(R > 0.0) || !(a_split > 0.0)) throw DomainError("exterior integral needs R > 0 and t > -R^2");
    const double K = p.master_constant() * std::pow(4.0 * kPi, 0.5 * n);
    Averager av(u, at.x, q);
    const double xn = av.xnorm();
    if (xn >= R) throw DomainError("exterior integral needs |x| < R");
    const TimeWindow tw = time_window(u, t);
    const bool spatial = std::isfinite(av.radius());
    const auto cuts = time_cuts(u, t, tw);
    const double ft = std::isfinite(u.feature_time) ? u.feature_time : kInf;
    const bool is_const = u.dependence == Dependence::Constant;
    const double c_val = is_const ? av.eval(at.x, t) : 0.0;

    Accum acc;
    std::vector<PanelContribution> trace;
    auto* tr = q.trace ? &trace : nullptr;

    // Part 1: tau in (-R^2, t), |y| > R. The kernel window reaches |y| = R only for a >= a_reach.
    const double a_reach = std::pow((R - xn) / (2.0 * kWindow[n - 1]), 2);
    const double lo1 = std::max(a_reach, tw.a_lo), hi1 = std::min(a_split, tw.a_hi);
    if (hi1 > lo1 && !(spatial && av.radius() <= R)) {
        auto panels = downward_panels(lo1, hi1, q.grading);
        split_panels(panels, cuts);
        if (std::isfinite(ft)) refine_panels(panels, lo1, hi1, 0.5 * ft);
        integrate_panels(
            panels, q.gl_order,
            [&](double a) {
                const double tau = t - a;
                const double m = av.average(a, Region::Exterior, R, [&](std::span<const double> y) {
                    return is_const ? c_val : av.eval(y, tau);
                });
                return std::pow(a, -1.0 - s) * m;
            },
            acc, tr);
    }

    // Part 2: tau < -R^2 over all space.
    bool flag = false;
    if (is_const) {
        const double v = c_val * std::pow(a_split, -s) / s;
        acc.value += v;
        acc.abs_sum += std::abs(v);
        return finish(acc, K, av.evals, false, std::move(trace));
    }
    auto avg_all = [&](double a) {
        const double tau = t - a;
        if (!tw.contains(a)) return 0.0;
        if (u.dependence == Dependence::TimeOnly) return av.eval(at.x, tau);
        if (av.pure_gh()) {
            const double a_gh = u.feature_length * u.feature_length * q.gh_order / 20.0;
            return -av.gh_difference(0.0, a, tau, av.gh_order_for(a, a_gh));
        }
        return av.average(a, Region::All, 0.0, [&](std::span<const double> y) { return av.eval(y, tau); });
    };
    const double ratio = upward_ratio(q);
    double a_end;
    double decay = 0.0;
    bool frozen_tail = true;
    if (std::isfinite(tw.a_hi)) {
        a_end = tw.a_hi;
        frozen_tail = false;
    } else if (spatial) {
        decay = 0.5 * n;
        a_end = a_split * std::pow(1e16, 1.0 / (s + decay));
    } else if (u.dependence == Dependence::TimeOnly) {
        a_end = std::min(a_split * std::pow(1e16, 1.0 / s), 1e300);
    } else if (q.horizon) {
        a_end = std::max(*q.horizon, a_split);
        flag = true;
    } else if (u.growth_envelope) {
        a_end = 64.0 * a_split;
        flag = true;
    } else {
        throw IntegrabilityError(
            "tail integral of a function without support needs a declared growth envelope or an explicit horizon");
    }
    if (a_end > a_split) {
        if (frozen_tail && u.dependence == Dependence::TimeOnly && !spatial)
            check_past_growth(avg_all, a_split, a_end, ratio, s, "tail");
        auto up = upward_panels(std::max(a_split, tw.a_lo), a_end, ratio);
        split_panels(up, cuts);
        if (std::isfinite(ft) && std::isfinite(tw.a_hi)) refine_panels(up, tw.a_lo, tw.a_hi, 0.5 * ft);
        integrate_panels(up, q.gl_order, [&](double a) { return std::pow(a, -1.0 - s) * avg_all(a); }, acc, tr);
        if (frozen_tail) {
            const double Ec = avg_all(a_end), Ep = avg_all(a_end / ratio);
            const double w = std::pow(a_end, -s) / (s + decay);
            acc.value += Ec * w;
            acc.err += std::abs(Ec - Ep) * w;
        }
    }
    return finish(acc, K, av.evals, flag, std::move(trace));
}

QuadResult integrate_interior_difference(const FunctionHandle& v, const SpaceTimePoint& at, double R,
                                         const KernelParams& p, const QuadSpec& q) {
    validate(q);
    check_point(v, at.x, p.n);
    const int n = p.n;
    const double s = p.s, t = at.t;
    const double a_split = t + R * R;
    if (!(R > 0.0) || !(a_split > 0.0)) throw DomainError("interior integral needs R > 0 and t > -R^2");
    const double K = p.master_constant() * std::pow(4.0 * kPi, 0.5 * n);
    if (v.dependence == Dependence::Constant) return {};
    Averager av(v, at.x, q);
    const double xn = av.xnorm();
    if (xn >= R) throw DomainError("interior integral needs |x| < R");
    const double v0 = av.eval(at.x, t);
    const double ell = v.feature_length > 0 ? v.feature_length : 1.0;
    const double zmax = cached_gauss_hermite(q.gh_order).nodes.back();
    const double a_in = std::min(ell * ell * q.gh_order / 20.0, std::pow((R - xn) / (2.0 * std::max(zmax, 1.0)), 2));
    const TimeWindow tw = time_window(v, t);

    auto D = [&](double a) {
        const double tau = t - a;
        if (a <= a_in) {
            if (!tw.contains(a)) return v0;
            return av.gh_difference(v0, a, tau, q.gh_order);
        }
        const bool live = tw.contains(a);
        return av.average(a, Region::Ball, R,
                          [&](std::span<const double> y) { return v0 - (live ? av.eval(y, tau) : 0.0); });
    };

    auto panels = graded_time_mesh(std::max(a_split, 4.0 * q.a_min), q.grading, q.a_min);
    auto cuts = time_cuts(v, t, tw);
    cuts.push_back(a_in);
    split_panels(panels, cuts);
    if (std::isfinite(v.feature_time)) refine_panels(panels, 0.0, a_split, 0.5 * v.feature_time);

    Accum acc;
    std::vector<PanelContribution> trace;
    integrate_panels(panels, q.gl_order, [&](double a) { return std::pow(a, -1.0 - s) * D(a); }, acc,
                     q.trace ? &trace : nullptr);
    const double a1 = smallest_lo(panels);
    inner_correction(a1, D(a1), D(2.0 * a1), 1.0, s, v, 0.5 * v.epsilon.value_or(0.1), acc);
    return finish(acc, K, av.evals, false, std::move(trace));
}

QuadResult integrate_time_difference(const FunctionHandle& u, double t, double constant, double s, const QuadSpec& q) {
    validate(q);
    if (!(s > 0.0 && s < 1.0)) throw DomainError("order s must lie in (0,1)");
    if (!std::isfinite(t)) throw DomainError("time must be finite");
    if (u.dependence == Dependence::Constant) return {};
    std::vector<double> x0(std::max(1, u.dim), 0.0);
    std::size_t evals = 0;
    auto ev = [&](double tau) {
        ++evals;
        return u(x0, tau);
    };
    const double u0 = ev(t);
    const TimeWindow tw = time_window(u, t);
    auto past = [&](double a) { return tw.contains(a) ? ev(t - a) : 0.0; };
    if (tw.a_hi <= 0.0) {
        if (u0 == 0.0) return {};
        throw NumericError("Marchaud integral diverges: u vanishes on the whole past but not at t");
    }
    const double ft = std::isfinite(u.feature_time) && u.feature_time > 0 ? u.feature_time : 1.0;
    double T;
    bool exact_end = false, flag = false;
    if (q.horizon)
        T = *q.horizon;
    else if (std::isfinite(tw.a_hi))
        T = tw.a_hi;
    else
        T = 64.0 * std::max(ft, 1.0);
    if (T >= tw.a_hi) {
        T = tw.a_hi;
        exact_end = true;
    }
    T = std::max(T, 4.0 * q.a_min);

    auto panels = graded_time_mesh(T, q.grading, q.a_min);
    const auto cuts = time_cuts(u, t, tw);
    split_panels(panels, cuts);
    refine_panels(panels, 0.0, T, 0.5 * ft);

    Accum acc;
    std::vector<PanelContribution> trace;
    auto* tr = q.trace ? &trace : nullptr;
    auto D = [&](double a) { return u0 - past(a); };
    integrate_panels(panels, q.gl_order, [&](double a) { return std::pow(a, -1.0 - s) * D(a); }, acc, tr);
    const double a1 = smallest_lo(panels);
    inner_correction(a1, D(a1), D(2.0 * a1), 1.0, s, u, 0.5 * u.epsilon.value_or(0.1), acc);
    const double uT = u0 * std::pow(T, -s) / s;
    acc.value += uT;
    acc.abs_sum += std::abs(uT);

    if (!exact_end) {
        const double ratio = upward_ratio(q);
        double cap = T;
        if (!q.horizon) {
            cap = std::min({T * std::pow(1e16, 1.0 / s), tw.a_hi, 1e300});
            check_past_growth(past, T, cap, ratio, s, "Marchaud");
            auto up = upward_panels(T, cap, ratio);
            split_panels(up, cuts);
            integrate_panels(up, q.gl_order, [&](double a) { return std::pow(a, -1.0 - s) * past(a); }, acc, tr, -1.0);
        } else {
            flag = true;
        }
        if (cap < tw.a_hi) {
            const double Ec = past(cap), Ep = past(cap / ratio);
            const double w = std::pow(cap, -s) / s;
            acc.value -= Ec * w;
            acc.err += std::abs(Ec - Ep) * w;
        }
    }
    return finish(acc, constant, evals, flag, std::move(trace));
}

namespace {

/// Directions and weights of an angular rule on S^{n-1}; weights sum to |S^{n-1}|.
struct SphereRule {
    std::vector<std::vector<double>> dirs;
    std::vector<double> weights;
};

SphereRule sphere_rule(int n, int m) {
    SphereRule rule;
    if (n == 1) {
        rule.dirs = {{1.0}, {-1.0}};
        rule.weights = {1.0, 1.0};
        return rule;
    }
    if (n == 2) {
        for (int k = 0; k < m; ++k) {
            const double ph = 2.0 * kPi * (k + 0.5) / m;
            rule.dirs.push_back({std::cos(ph), std::sin(ph)});
            rule.weights.push_back(2.0 * kPi / m);
        }
        return rule;
    }
    const int mt = std::max(2, m / 2);
    const auto& gl = cached_gauss_legendre(std::min(mt, 64));
    const int panels = std::max(1, mt / 64);
    for (int pi = 0; pi < panels; ++pi) {
        const double lo = -1.0 + 2.0 * pi / panels, hi = -1.0 + 2.0 * (pi + 1) / panels;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double mu = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[i];
            const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
            int mp = std::max(8, static_cast<int>(std::ceil(m * st)));
            mp += mp % 2;
            for (int k = 0; k < mp; ++k) {
                const double ph = 2.0 * kPi * (k + 0.5) / mp;
                rule.dirs.push_back({st * std::cos(ph), st * std::sin(ph), mu});
                rule.weights.push_back(0.5 * (hi - lo) * gl.weights[i] * 2.0 * kPi / mp);
            }
        }
    }
    return rule;
}

} // namespace

QuadResult integrate_radial_difference(const FunctionHandle& u, std::span<const double> x, double constant, double s,
                                       const QuadSpec& q) {
    validate(q);
    if (!(s > 0.0 && s < 1.0)) throw DomainError("order s must lie in (0,1)");
    const int n = static_cast<int>(x.size());
    if (n < 1 || n > 3) throw DomainError("radial quadrature supports n in {1,2,3}");
    if (u.dim > n) throw DomainError("function dimension exceeds the point dimension");
    if (u.dependence == Dependence::Constant) return {};
    std::size_t evals = 0;
    std::vector<double> y(n);
    const std::vector<double> xv(x.begin(), x.end());
    auto ev = [&](std::span<const double> p) {
        ++evals;
        return u(p, 0.0);
    };
    const double u0 = ev(xv);
    const double ell = u.feature_length > 0 ? u.feature_length : 1.0;
    const double omega = unit_sphere_measure(n);
    const double xn = std::sqrt(squared_norm(xv));
    const bool spatial = u.support && u.support->spatially_bounded();

    double r_hi;
    bool exact = false, flag = false;
    if (spatial) {
        r_hi = xn + u.support->radius;
        exact = true;
        if (q.radial_horizon && *q.radial_horizon < r_hi) {
            r_hi = *q.radial_horizon;
            exact = false;
            flag = true;
        }
    } else if (q.radial_horizon) {
        r_hi = *q.radial_horizon;
        flag = true;
    } else {
        r_hi = (n == 1 ? 1000.0 : 100.0) * ell;
        flag = true;
    }
    const double r_min = std::sqrt(q.a_min);
    r_hi = std::max(r_hi, 4.0 * r_min);

    // Angular resolution tied to the largest radius, capped for desk-scale cost.
    const int m_ang = std::clamp(static_cast<int>(std::ceil(2.0 * kPi * std::min(r_hi, 200.0 * ell) / (0.5 * ell))), 16,
                                 n == 2 ? 4096 : 256);
    const SphereRule sph = sphere_rule(n, m_ang + (m_ang % 2));
    auto ring = [&](double r) {
        double acc_u = 0.0;
        for (std::size_t k = 0; k < sph.dirs.size(); ++k) {
            for (int c = 0; c < n; ++c) y[c] = xv[c] + r * sph.dirs[k][c];
            acc_u += sph.weights[k] * ev(y);
        }
        return acc_u;
    };
    auto S = [&](double r) {
        // Symmetric average over +theta and -theta; the rules are symmetric so the plain sum suffices.
        return omega * u0 - ring(r);
    };

    auto panels = graded_time_mesh(r_hi, q.grading, r_min);
    std::vector<double> cuts;
    if (spatial) {
        const double rho = u.support->radius;
        cuts = {std::abs(rho - xn), rho + xn};
    }
    split_panels(panels, cuts);
    refine_panels(panels, 0.0, r_hi, 0.5 * ell);

    Accum acc;
    std::vector<PanelContribution> trace;
    auto* tr = q.trace ? &trace : nullptr;
    integrate_panels(panels, q.gl_order, [&](double r) { return std::pow(r, -1.0 - 2.0 * s) * S(r); }, acc, tr);
    const double r1 = smallest_lo(panels);
    inner_correction(r1, S(r1), S(2.0 * r1), 2.0, 2.0 * s, u, u.epsilon.value_or(0.1), acc);
    const double tail0 = omega * u0 * std::pow(r_hi, -2.0 * s) / (2.0 * s);
    acc.value += tail0;
    acc.abs_sum += std::abs(tail0);
    if (!exact) acc.err += std::abs(ring(r_hi)) * std::pow(r_hi, -2.0 * s) / (2.0 * s);
    return finish(acc, constant, evals, flag, std::move(trace));
}

} // namespace masterop
