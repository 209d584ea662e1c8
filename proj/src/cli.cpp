#include "masterop/cli.hpp"

#include "masterop/defect.hpp"
#include "masterop/errors.hpp"
#include "masterop/families.hpp"
#include "masterop/funcdsl.hpp"
#include "masterop/operators.hpp"
#include "masterop/parallel.hpp"
#include "masterop/regions.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

namespace masterop::cli {

namespace {

using nlohmann::json;

const char* kGrammar = R"(Expressions (u(x,t)):
  expr    := term (('+'|'-') term)*
  term    := unary (('*'|'/') unary)*
  unary   := '-' unary | power
  power   := primary ('^' ['-'] number)?
  primary := number | x1 | x2 | x3 | t | '(' expr ')'
           | fn '(' expr ')'        fn in exp cos sin abs pos sqrt bump
           | phi(j, alpha, beta) | psi(j, alpha, beta) | w(j, gamma)
  pos(v) = max(v, 0); bump(r) = exp(-1/((r-2)(3-r))) on (2,3), else 0.
Negative option values need '=', e.g. --probe=-1,0.5.)";

struct Global {
    int n = 1;
    double s = 0.5;
    std::string normalization = "normalized";
    std::optional<double> tol;
    int gh_order = 20;
    std::optional<double> horizon;
    std::string seed = "0xA11CE";
    int jobs = 1;
    std::string format = "csv";
    std::string out;
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Normalization mode_of(const Global& g) {
    return g.normalization == "raw" ? Normalization::Raw : Normalization::Normalized;
}

KernelParams params_of(const Global& g) { return kernel_constants(g.n, g.s, mode_of(g)); }

QuadSpec quad_of(const Global& g, bool tol_is_quadrature) {
    QuadSpec q;
    q.gh_order = g.gh_order;
    q.horizon = g.horizon;
    if (tol_is_quadrature && g.tol) q.rel_tol = *g.tol;
    validate(q);
    return q;
}

std::uint64_t seed_of(const Global& g) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(g.seed, &used, 0);
        if (used != g.seed.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw DomainError("seed '" + g.seed + "' is not an unsigned integer");
    }
}

SpaceTimePoint parse_probe(const std::string& text, int n) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw DomainError("probe '" + text + "' is not a comma-separated list of numbers");
        }
    }
    if (static_cast<int>(v.size()) != n + 1)
        throw DomainError("probe '" + text + "' needs " + std::to_string(n + 1) + " values (x1..xn,t)");
    SpaceTimePoint p;
    p.x.assign(v.begin(), v.end() - 1);
    p.t = v.back();
    return p;
}

std::vector<SpaceTimePoint> parse_probes(const std::vector<std::string>& texts, int n) {
    std::vector<SpaceTimePoint> out;
    for (const auto& t : texts) out.push_back(parse_probe(t, n));
    return out;
}

std::string point_header(int n) {
    if (n == 1) return "px,pt";
    std::string h;
    for (int k = 1; k <= n; ++k) h += "px" + std::to_string(k) + ",";
    return h + "pt";
}

std::string point_cells(const SpaceTimePoint& p) {
    std::string s;
    for (double v : p.x) s += num(v) + ",";
    return s + num(p.t);
}

json point_json(const SpaceTimePoint& p) { return json{{"x", p.x}, {"t", p.t}}; }

/// Destination stream for --out, falling back to `fallback`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw DomainError("cannot open output file '" + path + "'");
            os_ = file_.get();
        }
    }
    std::ostream& get() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

// eval ----------------------------------------------------------------------

struct EvalArgs {
    std::string expr;
    std::string op = "master";
    std::vector<double> x;
    double t = 0.0;
};

int cmd_eval(const Global& g, const EvalArgs& a, std::ostream& out) {
    HandleOptions opt;
    opt.dim = g.n;
    opt.s = g.s;
    opt.normalization = mode_of(g);
    const FunctionHandle u = to_handle(parse(a.expr), opt);
    const KernelParams p = params_of(g);
    const QuadSpec q = quad_of(g, true);
    std::vector<double> x = a.x.empty() ? std::vector<double>(g.n, 0.0) : a.x;
    if (static_cast<int>(x.size()) != g.n)
        throw DomainError("point has " + std::to_string(x.size()) + " spatial coordinates, expected n = " +
                          std::to_string(g.n));
    QuadResult r;
    if (a.op == "master")
        r = master_op(u, SpaceTimePoint{x, a.t}, p, q);
    else if (a.op == "flap")
        r = fractional_laplacian(u, x, p, q);
    else
        r = marchaud(u, a.t, p, q);

    Sink sink(g.out, out);
    if (g.format == "json") {
        json j{{"op", a.op},
               {"expr", a.expr},
               {"x", x},
               {"t", a.t},
               {"value", r.value},
               {"err_estimate", r.err_estimate},
               {"nodes_used", r.nodes_used},
               {"truncation_flag", r.truncation_flag}};
        sink.get() << j.dump() << "\n";
    } else {
        sink.get() << "op," << point_header(g.n) << ",value,err_estimate,nodes_used,truncation_flag\n";
        sink.get() << a.op << "," << point_cells(SpaceTimePoint{x, a.t}) << "," << num(r.value) << ","
                   << num(r.err_estimate) << "," << r.nodes_used << "," << (r.truncation_flag ? 1 : 0) << "\n";
    }
    return Ok;
}

// counterexample --------------------------------------------------------------

struct CounterArgs {
    int which = 3;
    std::vector<int> j{2, 4, 8, 16};
    std::optional<double> alpha;
    std::optional<double> beta;
    double gamma = 1.0;
    std::vector<std::string> probes;
};

int cmd_counterexample(const Global& g, const CounterArgs& a, std::ostream& out) {
    const KernelParams p = params_of(g);
    const QuadSpec q = quad_of(g, false);
    const Normalization mode = mode_of(g);
    const double beta = a.beta.value_or(1.0);
    for (int j : a.j)
        if (j < 1) throw DomainError("family index j must be >= 1");

    std::vector<SpaceTimePoint> probes = parse_probes(a.probes, g.n);
    double target = 0.0;
    double tol = 0.0;
    bool diverging = false;
    std::function<double(int, const SpaceTimePoint&)> eval;

    if (a.which == 1) {
        const double alpha = a.alpha.value_or(2.0 * beta * g.s);
        const double critical = 2.0 * beta * g.s;
        if (probes.empty()) probes.push_back(SpaceTimePoint{std::vector<double>(g.n, 0.0), 0.0});
        if (std::abs(alpha - critical) <= 1e-12) {
            const double c0 = C0_constant(g.s, g.n, mode);
            target = -c0;
            tol = g.tol.value_or(0.02 * c0);
        } else if (alpha < critical) {
            tol = g.tol.value_or(1e-3);
        } else {
            diverging = true;
        }
        eval = [&, alpha](int j, const SpaceTimePoint& at) {
            return fractional_laplacian(phi_family(j, alpha, beta, g.n), at.x, p, q).value;
        };
    } else if (a.which == 2) {
        const double alpha = a.alpha.value_or(beta * g.s);
        const double critical = beta * g.s;
        if (probes.empty()) probes.push_back(SpaceTimePoint{std::vector<double>(g.n, 0.0), 0.0});
        if (std::abs(alpha - critical) <= 1e-12) {
            const double c1 = C1_constant(g.s, mode);
            target = -c1;
            tol = g.tol.value_or(0.02 * c1);
        } else if (alpha < critical) {
            tol = g.tol.value_or(1e-3);
        } else {
            diverging = true;
        }
        eval = [&, alpha](int j, const SpaceTimePoint& at) {
            return marchaud(psi_family(j, alpha, beta), at.t, p, q).value;
        };
    } else if (a.which == 3) {
        make_family_params(1, 2.0 * g.s, 1.0, a.gamma, g.s, g.n, mode);
        if (probes.empty()) {
            for (auto [x, t] : {std::pair{0.0, 0.0}, {1.0, 1.0}, {-1.0, 0.5}}) {
                std::vector<double> xv(g.n, 0.0);
                xv[0] = x;
                probes.push_back(SpaceTimePoint{xv, t});
            }
        }
        target = -1.0;
        tol = g.tol.value_or(5e-2);
        eval = [&](int j, const SpaceTimePoint& at) {
            return master_op(w_family(j, a.gamma, g.s, g.n, mode), at, p, q).value;
        };
    } else {
        throw DomainError("--which must be 1, 2 or 3");
    }

    const std::size_t np = probes.size();
    std::vector<double> values(a.j.size() * np);
    parallel_for(values.size(), g.jobs, [&](std::size_t k) {
        values[k] = eval(a.j[k / np], probes[k % np]);
    });

    auto verdict = [&](std::size_t pi) -> std::string {
        if (diverging) {
            for (std::size_t k = 1; k < a.j.size(); ++k)
                if (!(std::abs(values[k * np + pi]) > std::abs(values[(k - 1) * np + pi]))) return "not_diverging";
            return "diverging";
        }
        const double last = values[(a.j.size() - 1) * np + pi];
        return std::abs(last - target) <= tol ? "converged" : "not_converged";
    };
    const double shown_target = diverging ? -std::numeric_limits<double>::infinity() : target;

    Sink sink(g.out, out);
    if (g.format == "json") {
        json rows = json::array();
        for (std::size_t k = 0; k < values.size(); ++k) {
            const std::size_t pi = k % np;
            rows.push_back({{"j", a.j[k / np]},
                            {"probe", point_json(probes[pi])},
                            {"value", values[k]},
                            {"abs_err", diverging ? json(nullptr) : json(std::abs(values[k] - target))}});
        }
        json verdicts = json::array();
        for (std::size_t pi = 0; pi < np; ++pi) verdicts.push_back(verdict(pi));
        json j{{"which", a.which},
               {"target", diverging ? json("-inf") : json(target)},
               {"tol", tol},
               {"rows", rows},
               {"verdicts", verdicts}};
        sink.get() << j.dump(2) << "\n";
    } else {
        sink.get() << "j," << point_header(g.n) << ",value,target,abs_err,verdict\n";
        for (std::size_t k = 0; k < values.size(); ++k) {
            const std::size_t pi = k % np;
            const bool last = k / np + 1 == a.j.size();
            sink.get() << a.j[k / np] << "," << point_cells(probes[pi]) << "," << num(values[k]) << ","
                       << num(shown_target) << "," << num(std::abs(values[k] - shown_target)) << ","
                       << (last ? verdict(pi) : "") << "\n";
        }
    }
    return Ok;
}

// defect ----------------------------------------------------------------------

struct DefectArgs {
    std::string family = "w";
    double gamma = 1.0;
    std::vector<double> R{8.0, 16.0, 32.0};
    std::vector<int> j{32, 64, 128, 256, 512};
    std::vector<std::string> probes;
    std::string summary;
    int consistency_j = 0;
};

json defect_summary(const DefectReport& r) {
    json b = json::array();
    for (const auto& v : r.b_per_probe) b.push_back(v ? json(*v) : json(nullptr));
    return json{{"b_estimate", r.b_estimate ? json(*r.b_estimate) : json(nullptr)},
                {"b_spread", r.b_spread},
                {"monotone_ok", r.monotone_ok},
                {"converged", r.converged},
                {"liminf_bound_M", r.liminf_bound_M},
                {"N_threshold", r.N_threshold},
                {"b_per_probe", b},
                {"consistency", r.consistency},
                {"notes", r.notes}};
}

int cmd_defect(const Global& g, const DefectArgs& a, std::ostream& out, std::ostream& err) {
    const KernelParams p = params_of(g);
    const QuadSpec q = quad_of(g, false);
    const Normalization mode = mode_of(g);
    Family family;
    FunctionHandle limit;
    if (a.family == "w") {
        make_family_params(1, 2.0 * g.s, 1.0, a.gamma, g.s, g.n, mode);
        family = [&](int j) { return w_family(j, a.gamma, g.s, g.n, mode); };
        limit = constant_function(g.n, 0.0);
    } else {
        HandleOptions opt;
        opt.dim = g.n;
        opt.s = g.s;
        opt.normalization = mode;
        limit = to_handle(parse(a.family), opt);
        family = [limit](int) { return limit; };
    }
    if (a.R.empty() || a.j.empty()) throw DomainError("R and j schedules must be non-empty");
    std::vector<SpaceTimePoint> probes = parse_probes(a.probes, g.n);
    if (probes.empty()) probes = default_probes(g.n, *std::max_element(a.R.begin(), a.R.end()));

    DefectOptions opt;
    opt.tol = g.tol.value_or(opt.tol);
    opt.jobs = g.jobs;
    opt.consistency_j = a.consistency_j;
    const DefectReport r = defect_estimate(family, limit, probes, a.R, a.j, p, q, opt);

    Sink sink(g.out, out);
    const json summary = defect_summary(r);
    if (g.format == "json") {
        json rows = json::array();
        for (const auto& smp : r.samples)
            rows.push_back({{"j", smp.j}, {"R", smp.R}, {"probe", point_json(smp.at)}, {"F", smp.F_value},
                            {"err", smp.err}});
        json j{{"samples", rows}, {"summary", summary}};
        sink.get() << j.dump(2) << "\n";
        return Ok;
    }
    sink.get() << "j,R," << point_header(g.n) << ",F,err\n";
    for (const auto& smp : r.samples)
        sink.get() << smp.j << "," << num(smp.R) << "," << point_cells(smp.at) << "," << num(smp.F_value) << ","
                   << num(smp.err) << "\n";
    if (!a.summary.empty()) {
        std::ofstream f(a.summary);
        if (!f) throw DomainError("cannot open summary file '" + a.summary + "'");
        f << summary.dump(2) << "\n";
    } else {
        err << summary.dump() << "\n";
    }
    return Ok;
}

// verify ----------------------------------------------------------------------

struct VerifyArgs {
    std::vector<std::string> checks;
    std::vector<double> R;
    std::optional<std::size_t> samples;
    std::vector<double> x;
    double t = 0.0;
};

json ratio_json(const std::string& name, const RatioReport& r) {
    return json{{"name", name},
                {"pass", r.pass},
                {"max_violation", r.max_ratio()},
                {"envelope", r.envelope()},
                {"max_log", r.max_log},
                {"envelope_log", r.envelope_log},
                {"constant", r.constant},
                {"samples", r.samples},
                {"degenerate", r.degenerate},
                {"note", r.note}};
}

json partition_json(const std::string& name, double R, const PartitionReport& r) {
    return json{{"name", name},
                {"R", R},
                {"pass", r.pass()},
                {"max_violation", static_cast<double>(r.double_assignments + r.non_assignments + r.mismatches)},
                {"envelope", 0.0},
                {"samples", r.samples},
                {"double_assignments", r.double_assignments},
                {"non_assignments", r.non_assignments},
                {"mismatches", r.mismatches},
                {"counts", r.counts}};
}

json decay_check(const KernelParams& p) {
    const int m = 100;
    const double lo = std::log(1e-3), hi = std::log(1e3);
    const double step = (hi - lo) / m;
    std::size_t violations = 0;
    double worst = 0.0;
    std::vector<double> dx(p.n, 0.0);
    for (int i = 0; i < m; ++i) {
        for (int k = 0; k < m; ++k) {
            dx[0] = std::exp(lo + (i + 0.5) * step);
            const DecayCheck c = kernel_decay_check(dx, std::exp(lo + (k + 0.5) * step), p);
            if (!c.pass) ++violations;
            if (c.majorant > 0.0) worst = std::max(worst, c.value / c.majorant);
        }
    }
    return json{{"name", "decay"},     {"pass", violations == 0}, {"max_violation", worst},
                {"envelope", 1.0},     {"Lambda", p.Lambda},      {"grid_points", m * m},
                {"violations", violations}};
}

json reductions_check(const Global& g, const KernelParams& p, const QuadSpec& q) {
    HandleOptions opt;
    opt.dim = g.n;
    opt.s = g.s;
    opt.normalization = mode_of(g);
    std::vector<double> x(g.n, 0.0);
    x[0] = 0.3;
    const FunctionHandle c = to_handle(parse("cos(x1)"), opt);
    const double d1 = std::abs(master_op(c, SpaceTimePoint{x, 0.0}, p, q).value - fractional_laplacian(c, x, p, q).value);
    const FunctionHandle e = to_handle(parse("exp(t)"), opt);
    const double d2 = std::abs(master_op(e, SpaceTimePoint{x, 0.2}, p, q).value - marchaud(e, 0.2, p, q).value);
    const double worst = std::max(d1, d2);
    return json{{"name", "reductions"}, {"pass", worst <= 1e-4},   {"max_violation", worst},
                {"envelope", 1e-4},     {"space_only_diff", d1}, {"time_only_diff", d2}};
}

int cmd_verify(const Global& g, const VerifyArgs& a, std::ostream& out) {
    const std::uint64_t seed = seed_of(g);
    const KernelParams p = params_of(g);
    const QuadSpec q = quad_of(g, true);
    std::vector<double> x = a.x.empty() ? std::vector<double>(g.n, 0.0) : a.x;
    if (static_cast<int>(x.size()) != g.n) throw DomainError("--x must have n coordinates");
    if (a.samples && *a.samples < 1) throw DomainError("--samples must be >= 1");

    std::vector<std::string> checks = a.checks;
    if (std::find(checks.begin(), checks.end(), "all") != checks.end())
        checks = {"partition1", "partition2", "c1", "c2c3", "step2", "decay", "reductions"};

    auto radii = [&](std::vector<double> fallback) { return a.R.empty() ? fallback : a.R; };
    json results = json::array();
    bool all = true;
    auto add = [&](json j) {
        all = all && j["pass"].get<bool>();
        results.push_back(std::move(j));
    };
    for (const auto& c : checks) {
        if (c == "partition1") {
            for (double R : radii({100.0}))
                add(partition_json(c, R, verify_partition_step1(x, a.t, R, a.samples.value_or(100000), seed)));
        } else if (c == "partition2") {
            for (double R : radii({100.0}))
                add(partition_json(c, R, verify_partition_step2(g.n, a.t, R, a.samples.value_or(100000), seed)));
        } else if (c == "c1") {
            const C1Sweep sw = verify_ratio_c1_sweep(x, a.t, radii({1e2, 1e3, 1e4}), a.samples.value_or(10000), seed);
            json per = json::array();
            bool pass = sw.strictly_decreasing;
            double worst = 0.0, env = 0.0;
            for (std::size_t k = 0; k < sw.R.size(); ++k) {
                json r = ratio_json(c, sw.reports[k]);
                r["R"] = sw.R[k];
                pass = pass && sw.reports[k].pass;
                if (k == 0 || sw.reports[k].max_ratio() / sw.reports[k].envelope() > worst / env) {
                    worst = sw.reports[k].max_ratio();
                    env = sw.reports[k].envelope();
                }
                per.push_back(std::move(r));
            }
            add(json{{"name", c},
                     {"pass", pass},
                     {"max_violation", worst},
                     {"envelope", env},
                     {"strictly_decreasing", sw.strictly_decreasing},
                     {"per_R", per}});
        } else if (c == "c2c3") {
            for (double R : radii({1e4})) {
                // x = 0 makes both ratios identically 1, so default to e_1
                std::vector<double> xc = x;
                if (a.x.empty()) xc[0] = 1.0;
                const C2C3Report r = verify_ratio_c2_c3(xc, a.t, R, a.samples.value_or(10000), seed);
                json j2 = ratio_json("c2", r.c2), j3 = ratio_json("c3", r.c3);
                j2["R"] = R;
                j3["R"] = R;
                add(std::move(j2));
                add(std::move(j3));
            }
        } else if (c == "step2") {
            for (double R : radii({1e4})) {
                const Step2Report r = verify_ratio_step2(p, a.t, R, a.samples.value_or(10000), seed);
                for (auto [name, rr] : {std::pair{"step2_C", &r.C}, {"step2_D", &r.D}, {"step2_E", &r.E},
                                        {"step2_F", &r.F}}) {
                    json j = ratio_json(name, *rr);
                    j["R"] = R;
                    if (rr == &r.E) j["reference_shape"] = r.E_reference;
                    if (rr == &r.F) j["reference_shape"] = r.F_reference;
                    add(std::move(j));
                }
            }
        } else if (c == "decay") {
            add(decay_check(p));
        } else if (c == "reductions") {
            add(reductions_check(g, p, q));
        } else {
            throw DomainError("unknown check '" + c + "'");
        }
    }
    Sink sink(g.out, out);
    json j{{"seed", seed}, {"n", g.n}, {"s", g.s}, {"checks", results}, {"pass", all}};
    sink.get() << j.dump(2) << "\n";
    return all ? Ok : CheckFailed;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Evaluate the fractional heat operator and run its numerical experiments.", "masterop"};
    app.footer(kGrammar);
    app.require_subcommand(1);
    app.fallthrough();

    Global g;
    app.add_option("--n", g.n, "Spatial dimension")->check(CLI::Range(1, 3))->capture_default_str();
    app.add_option("--s", g.s, "Fractional order in (0,1)")->capture_default_str();
    app.add_option("--normalization", g.normalization, "Kernel constants")
        ->check(CLI::IsMember({"normalized", "raw"}))
        ->capture_default_str();
    app.add_option("--tol", g.tol,
                   "eval/verify: quadrature relative tolerance; counterexample/defect: convergence tolerance");
    app.add_option("--gh-order", g.gh_order, "Gauss-Hermite order")->capture_default_str();
    app.add_option("--horizon", g.horizon, "Time horizon for the memory integral");
    app.add_option("--seed", g.seed, "Sampling seed")->envname("MASTEROP_SEED")->capture_default_str();
    app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--format", g.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--out", g.out, "Output file (default stdout)");
    app.set_config("--config", "", "key=value file; command-line flags win");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "Evaluate an operator on an expression at a point");
    eval->add_option("expr", ea.expr, "Expression u(x,t)")->required();
    eval->add_option("--op", ea.op, "Operator")
        ->check(CLI::IsMember({"master", "flap", "marchaud"}))
        ->capture_default_str();
    eval->add_option("--x", ea.x, "Spatial point, comma separated (default origin)")->delimiter(',');
    eval->add_option("--t", ea.t, "Time")->capture_default_str();

    CounterArgs ca;
    auto* counter = app.add_subcommand("counterexample", "Run a counterexample family over a j schedule");
    counter->add_option("--which", ca.which, "1: phi_j, 2: psi_j, 3: w_j")->check(CLI::Range(1, 3))->capture_default_str();
    counter->add_option("--j", ca.j, "j schedule")->delimiter(',');
    counter->add_option("--alpha", ca.alpha, "Amplitude exponent (default: critical)");
    counter->add_option("--beta", ca.beta, "Scale exponent (default 1)");
    counter->add_option("--gamma", ca.gamma, "Time-scale exponent of w_j")->capture_default_str();
    counter->add_option("--probe", ca.probes, "Probe x1,..,xn,t (repeatable)");

    DefectArgs da;
    auto* defect = app.add_subcommand("defect", "Estimate the defect constant b");
    defect->add_option("--family", da.family, "'w' or a j-independent expression")->capture_default_str();
    defect->add_option("--gamma", da.gamma, "Time-scale exponent of w_j")->capture_default_str();
    defect->add_option("--R", da.R, "R schedule")->delimiter(',');
    defect->add_option("--j", da.j, "j schedule")->delimiter(',');
    defect->add_option("--probe", da.probes, "Probe x1,..,xn,t (repeatable)");
    defect->add_option("--summary", da.summary, "Write the JSON summary here instead of stderr");
    defect->add_option("--consistency-j", da.consistency_j, "Also compare master operators at this j");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Check partitions, ratio envelopes, kernel decay and reductions");
    verify->add_option("checks", va.checks, "partition1 partition2 c1 c2c3 step2 decay reductions all")
        ->required()
        ->check(CLI::IsMember({"partition1", "partition2", "c1", "c2c3", "step2", "decay", "reductions", "all"}));
    verify->add_option("--R", va.R, "Radii")->delimiter(',');
    verify->add_option("--samples", va.samples, "Samples per check");
    verify->add_option("--x", va.x, "Spatial point")->delimiter(',');
    verify->add_option("--t", va.t, "Time")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : Usage;
    }

    try {
        if (!(g.s > 0.0 && g.s < 1.0)) throw DomainError("--s must lie in (0,1)");
        seed_of(g);
        if (*eval) return cmd_eval(g, ea, out);
        if (*counter) return cmd_counterexample(g, ca, out);
        if (*defect) return cmd_defect(g, da, out, err);
        return cmd_verify(g, va, out);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return Usage;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return Numeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return Usage;
    }
}

} // namespace masterop::cli
