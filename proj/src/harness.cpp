#include "vmm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <memory>
#include <sstream>

#include "vmm/errors.hpp"

#ifndef VMM_BUILD_ID
#define VMM_BUILD_ID "unknown"
#endif

namespace vmm {

namespace {

using V2 = Eigen::Vector2d;
using M2 = Eigen::Matrix2d;

M2 diag(double a, double b)
{
    M2 m;
    m << a, 0.0, 0.0, b;
    return m;
}

SecondTraceFn hessian_trace(std::function<M2(const V2&)> hess)
{
    return [hess](const V2& x, const V2& nu, double) { return nu.dot(hess(x) * nu); };
}

ProblemSpec with_exact(ProblemSpec s, PointFn u, std::function<V2(const V2&)> grad, std::function<M2(const V2&)> hess)
{
    s.exact = ExactSolution{std::move(u), std::move(grad), std::move(hess)};
    return s;
}

// u = x^2 + y^2 on the unit square
ProblemSpec ma_quadratic(bool manufactured_trace)
{
    auto u = [](const V2& x) { return x.squaredNorm(); };
    auto du = [](const V2& x) { return V2(2.0 * x); };
    auto H = [](const V2&) { return diag(2.0, 2.0); };
    auto s = make_problem(OperatorKind::MongeAmpere, u, du, [](const V2&, double) { return 4.0; });
    if (manufactured_trace) s.second_trace = hessian_trace(H);
    return with_exact(s, u, du, H);
}

// u = x^4 + y^2: det D^2u = 24 x^2 and Delta^2 u = 24
ProblemSpec ma_quartic()
{
    auto u = [](const V2& x) { return std::pow(x(0), 4) + x(1) * x(1); };
    auto du = [](const V2& x) { return V2(4.0 * std::pow(x(0), 3), 2.0 * x(1)); };
    auto H = [](const V2& x) { return diag(12.0 * x(0) * x(0), 2.0); };
    auto s = make_problem(OperatorKind::MongeAmpere, u, du,
                          [](const V2& x, double eps) { return 24.0 * x(0) * x(0) - 24.0 * eps; });
    s.second_trace = hessian_trace(H);
    return with_exact(s, u, du, H);
}

// u = exp(|x|^2/2), with gradient x u and Hessian (I + x x^T) u
PointFn exp_u = [](const V2& x) { return std::exp(0.5 * x.squaredNorm()); };
std::function<V2(const V2&)> exp_grad = [](const V2& x) { return V2(x * std::exp(0.5 * x.squaredNorm())); };
std::function<M2(const V2&)> exp_hess = [](const V2& x) {
    return M2((M2::Identity() + x * x.transpose()) * std::exp(0.5 * x.squaredNorm()));
};

ProblemSpec ma_exp()
{
    auto s = make_problem(OperatorKind::MongeAmpere, exp_u, exp_grad, [](const V2& x, double) {
        const double r2 = x.squaredNorm();
        return (1.0 + r2) * std::exp(r2);
    });
    return with_exact(s, exp_u, exp_grad, exp_hess);
}

ProblemSpec gauss_exp()
{
    const double K = 0.1;
    auto s = make_problem(
        OperatorKind::GaussCurvature, exp_u, exp_grad,
        [K](const V2& x, double eps) {
            const double r2 = x.squaredNorm(), q = 1.0 + r2 * std::exp(r2);
            const double bilap = (8.0 + 8.0 * r2 + r2 * r2) * std::exp(0.5 * r2);
            return (1.0 + r2) * std::exp(r2) / (K * q * q) - eps / K * bilap;
        },
        K);
    s.second_trace = hessian_trace(exp_hess);
    return with_exact(s, exp_u, exp_grad, exp_hess);
}

// u = s^4/8 with s = |x|^2: grad u = s^3 x, det D^2u = 7 s^6, Delta^2 u = 288 s^2
ProblemSpec gauss_poly()
{
    const double K = 0.1;
    auto u = [](const V2& x) { return std::pow(x.squaredNorm(), 4) / 8.0; };
    auto du = [](const V2& x) { return V2(std::pow(x.squaredNorm(), 3) * x); };
    auto H = [](const V2& x) {
        const double s = x.squaredNorm();
        return M2(s * s * s * M2::Identity() + 6.0 * s * s * x * x.transpose());
    };
    auto s = make_problem(
        OperatorKind::GaussCurvature, u, du,
        [K](const V2& x, double eps) {
            const double r2 = x.squaredNorm(), s6 = std::pow(r2, 6), q = 1.0 + s6 * r2;
            return 7.0 * s6 / (K * q * q) - eps / K * 288.0 * r2 * r2;
        },
        K);
    s.second_trace = hessian_trace(H);
    return with_exact(s, u, du, H);
}

ProblemSpec inflap_smooth(std::optional<double> gamma)
{
    auto u = [](const V2& x) { return x.squaredNorm(); };
    auto du = [](const V2& x) { return V2(2.0 * x); };
    auto H = [](const V2&) { return diag(2.0, 2.0); };
    auto s = make_problem(
        OperatorKind::InfinityLaplacian, u, du,
        [gamma](const V2& x, double eps) {
            const double g = gamma ? *gamma : eps * eps, r2 = x.squaredNorm();
            return 8.0 * r2 / (4.0 * r2 + g);
        },
        1.0, gamma);
    return with_exact(s, u, du, H);
}

// u = cos x - cos y: Delta^2 u = u
ProblemSpec inflap_cos(std::optional<double> gamma)
{
    auto u = [](const V2& x) { return std::cos(x(0)) - std::cos(x(1)); };
    auto du = [](const V2& x) { return V2(-std::sin(x(0)), std::sin(x(1))); };
    auto H = [](const V2& x) { return diag(-std::cos(x(0)), std::cos(x(1))); };
    auto s = make_problem(
        OperatorKind::InfinityLaplacian, u, du,
        [gamma, u, du, H](const V2& x, double eps) {
            const double g = gamma ? *gamma : eps * eps;
            const V2 p = du(x);
            return p.dot(H(x) * p) / (p.squaredNorm() + g) - eps * u(x);
        },
        1.0, gamma);
    s.second_trace = hessian_trace(H);
    return with_exact(s, u, du, H);
}

ProblemSpec gauss_data(PointFn g, std::function<V2(const V2&)> dg)
{
    return make_problem(OperatorKind::GaussCurvature, std::move(g), std::move(dg), [](const V2&, double) { return 1.0; });
}

std::vector<CatalogEntry> build_catalog()
{
    std::vector<CatalogEntry> c;
    auto radial = [&](std::string id, std::string desc, int n) {
        CatalogEntry e;
        e.id = std::move(id);
        e.description = std::move(desc);
        e.radial = true;
        e.radial_problem = [n] {
            RadialProblem p;
            p.n = n;
            p.f = [n](double r) { return (1.0 + r * r) * std::exp(0.5 * n * r * r); };
            p.gR = std::exp(0.5);
            return p;
        };
        c.push_back(std::move(e));
    };
    radial("radial-exp", "radial Monge-Ampere, n=2, limit u = exp(r^2/2)", 2);
    radial("radial-exp-n4", "radial Monge-Ampere, n=4, limit u = exp(r^2/2)", 4);

    auto planar = [&](std::string id, std::string desc, Rectangle box,
                      std::function<ProblemSpec(std::optional<double>)> build) {
        CatalogEntry e;
        e.id = std::move(id);
        e.description = std::move(desc);
        e.box = box;
        e.build = std::move(build);
        c.push_back(std::move(e));
    };
    const Rectangle unit{0.0, 1.0, 0.0, 1.0}, centered{-0.5, 0.5, -0.5, 0.5}, kstar{-0.57, 0.57, -0.57, 0.57};
    planar("ma-quadratic", "Monge-Ampere, u = x^2+y^2 with exact second trace (eps-independent)", unit,
           [](auto) { return ma_quadratic(true); });
    planar("ma-quadratic-limit", "Monge-Ampere, limit u = x^2+y^2, second trace eps", unit,
           [](auto) { return ma_quadratic(false); });
    planar("ma-quartic", "Monge-Ampere, u = x^4+y^2, f = 24x^2-24eps (planar section of the x^4+y^2+z^6 family)",
           unit, [](auto) { return ma_quartic(); });
    planar("ma-exp", "Monge-Ampere, limit u = exp(|x|^2/2), f = (1+|x|^2)exp(|x|^2) (planar section)", unit,
           [](auto) { return ma_exp(); });
    planar("gauss-exp", "Gauss curvature K=0.1, u = exp(|x|^2/2)", unit, [](auto) { return gauss_exp(); });
    planar("gauss-poly", "Gauss curvature K=0.1, u = |x|^8/8", unit, [](auto) { return gauss_poly(); });
    planar("inflap-smooth", "infinity-Laplacian, limit u = x^2+y^2", centered, inflap_smooth);
    planar("inflap-cos", "infinity-Laplacian, u = cos x - cos y", centered, inflap_cos);
    planar("gauss-kstar-a", "Gauss curvature threshold, g = sqrt(1-|x|^2)", kstar, [](auto) {
        return gauss_data([](const V2& x) { return std::sqrt(1.0 - x.squaredNorm()); },
                          [](const V2& x) { return V2(-x / std::sqrt(1.0 - x.squaredNorm())); });
    });
    planar("gauss-kstar-b", "Gauss curvature threshold, g = 1-|x|^2", kstar, [](auto) {
        return gauss_data([](const V2& x) { return 1.0 - x.squaredNorm(); }, [](const V2& x) { return V2(-2.0 * x); });
    });
    planar("gauss-kstar-c", "Gauss curvature threshold, g = 1-|x-(0.075,0.015)|^2", kstar, [](auto) {
        const V2 c(0.075, 0.015);
        return gauss_data([c](const V2& x) { return 1.0 - (x - c).squaredNorm(); },
                          [c](const V2& x) { return V2(-2.0 * (x - c)); });
    });
    return c;
}

double quantize(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return std::strtod(buf, nullptr);
}

std::optional<double> quantize(std::optional<double> v) { return v ? std::optional(quantize(*v)) : std::nullopt; }

using Errors4 = std::array<std::optional<double>, 4>;

struct PointOutcome {
    bool ok = false;
    Errors4 err;
};

bool is_solver_failure(const std::exception_ptr& e)
{
    try {
        std::rethrow_exception(e);
    } catch (const NonConvergenceError&) {
        return true;
    } catch (const SingularMatrixError&) {
        return true;
    } catch (...) {
        return false;
    }
}

template <class F>
PointOutcome guarded(F&& f)
{
    try {
        return f();
    } catch (...) {
        if (is_solver_failure(std::current_exception())) return {};
        throw;
    }
}

std::vector<PointOutcome> radial_sweep(const CatalogEntry& entry, const SweepConfig& cfg)
{
    const RadialProblem problem = entry.radial_problem();
    std::vector<PointOutcome> out;
    std::optional<HermiteState> prev;
    for (double v : cfg.values) {
        const double eps = cfg.variable == SweepVariable::Eps ? v : cfg.eps;
        const int N = cfg.variable == SweepVariable::Eps ? cfg.grid : cells_for(problem.R, v);
        out.push_back(guarded([&] {
            const auto mesh = build_interval_mesh(problem.R, N);
            RadialOptions o;
            o.eps = eps;
            o.tol = cfg.tol;
            o.continuation_start = std::max(std::abs(eps), cfg.eps_start);
            const bool warm = !cfg.cold && prev && cfg.variable == SweepVariable::Eps && (prev->eps > 0) == (eps > 0);
            HermiteState st = solve_radial_fourth_order(problem, mesh, o, warm ? &*prev : nullptr);
            const auto exact = exact_radial_solution(problem, eps > 0 ? Branch::Convex : Branch::Concave);
            const auto e = radial_errors(st.profile(), exact, mesh);
            prev = std::move(st);
            return PointOutcome{true, {e.L2, e.H1, e.lap_L2, e.Linf}};
        }));
    }
    return out;
}

PointOutcome mixed_point(const ProblemSpec& spec, const Rectangle& box, const SweepConfig& cfg, double eps, double h,
                         int grid, const MixedState* warm, std::vector<std::unique_ptr<MixedSpace>>& spaces,
                         MixedState* keep)
{
    MixedOptions o;
    o.tau = cfg.tau;
    o.tol = cfg.tol;
    const int nx = h > 0 ? cells_for(box.x1 - box.x0, h) : grid;
    const int ny = h > 0 ? cells_for(box.y1 - box.y0, h) : grid;
    auto mesh = std::make_shared<const TriangleMesh>(build_rectangle_mesh(box, nx, ny));
    spaces.push_back(std::make_unique<MixedSpace>(mesh, cfg.degree));
    const MixedSpace& space = *spaces.back();
    const double start = std::copysign(std::max(std::abs(eps), cfg.eps_start), eps);

    MixedState st;
    bool done = false;
    if (warm) {
        MixedState w = warm->space == &space ? *warm : transfer(*warm, space);
        w.eps = eps;
        if (o.tau) w.tau = *o.tau;
        try {
            st = newton_solve(spec, w, o);
            done = true;
        } catch (...) {
            if (!is_solver_failure(std::current_exception())) throw;
        }
    } else if (cfg.coarse_factor > 1 && std::min(nx, ny) / cfg.coarse_factor >= 2) {
        // continuation on a coarse grid, then a single fine-grid solve
        auto cmesh = std::make_shared<const TriangleMesh>(
            build_rectangle_mesh(box, nx / cfg.coarse_factor, ny / cfg.coarse_factor));
        MixedSpace coarse(cmesh, cfg.degree);
        try {
            MixedState w = transfer(continuation_solve(spec, coarse, eps, start, {}, o).state, space);
            st = newton_solve(spec, w, o);
            done = true;
        } catch (...) {
            if (!is_solver_failure(std::current_exception())) throw;
        }
    }
    if (!done) st = continuation_solve(spec, space, eps, start, {}, o).state;
    PointOutcome r{true, {}};
    if (spec.exact) {
        const auto e = mixed_errors(st, *spec.exact);
        r.err = {e.L2, e.H1, e.sigma_L2, e.Linf};
    }
    if (keep) *keep = std::move(st);
    return r;
}

std::vector<PointOutcome> mixed_sweep(const CatalogEntry& entry, const SweepConfig& cfg)
{
    const ProblemSpec spec = entry.build(cfg.gamma);
    const std::size_t m = cfg.values.size();
    std::vector<PointOutcome> out(m);
    auto params = [&](std::size_t i) {
        const bool by_eps = cfg.variable == SweepVariable::Eps;
        return std::pair<double, double>{by_eps ? cfg.values[i] : cfg.eps, by_eps ? 0.0 : cfg.values[i]};
    };
    if (cfg.cold) {
        std::vector<std::future<PointOutcome>> jobs;
        for (std::size_t i = 0; i < m; ++i)
            jobs.push_back(std::async(std::launch::async, [&, i] {
                std::vector<std::unique_ptr<MixedSpace>> spaces;
                const auto [eps, h] = params(i);
                return guarded([&] { return mixed_point(spec, entry.box, cfg, eps, h, cfg.grid, nullptr, spaces, nullptr); });
            }));
        for (std::size_t i = 0; i < m; ++i) out[i] = jobs[i].get();
        return out;
    }
    std::vector<std::unique_ptr<MixedSpace>> spaces;
    std::optional<MixedState> prev;
    for (std::size_t i = 0; i < m; ++i) {
        const auto [eps, h] = params(i);
        MixedState keep;
        const bool warm = prev && (prev->eps > 0) == (eps > 0);
        out[i] = guarded([&] {
            return mixed_point(spec, entry.box, cfg, eps, h, cfg.grid, warm ? &*prev : nullptr, spaces, &keep);
        });
        if (out[i].ok) prev = std::move(keep);
    }
    return out;
}

std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

}  // namespace

const std::vector<CatalogEntry>& catalog()
{
    static const std::vector<CatalogEntry> entries = build_catalog();
    return entries;
}

const CatalogEntry& find_problem(const std::string& id)
{
    for (const auto& e : catalog())
        if (e.id == id) return e;
    throw InvalidArgument("unknown problem id: " + id);
}

std::vector<std::optional<double>> estimate_rate(const std::vector<std::optional<double>>& errors,
                                                 const std::vector<double>& params)
{
    if (errors.size() != params.size()) throw InvalidArgument("estimate_rate: length mismatch");
    if (params.size() < 2) throw InvalidArgument("estimate_rate: need at least two values");
    for (double p : params)
        if (!(p > 0.0)) throw InvalidArgument("estimate_rate: parameters must be positive");
    const bool dec = params[1] < params[0];
    for (std::size_t i = 1; i < params.size(); ++i)
        if ((params[i] < params[i - 1]) != dec || params[i] == params[i - 1])
            throw InvalidArgument("estimate_rate: parameters must be strictly monotone");
    std::vector<std::optional<double>> rates(errors.size());
    for (std::size_t i = 1; i < errors.size(); ++i) {
        const auto& a = errors[i - 1];
        const auto& b = errors[i];
        if (a && b && *a > 0.0 && *b > 0.0) rates[i] = std::log(*a / *b) / std::log(params[i - 1] / params[i]);
    }
    return rates;
}

std::vector<std::optional<double>> estimate_rate(const std::vector<double>& errors, const std::vector<double>& params)
{
    return estimate_rate(std::vector<std::optional<double>>(errors.begin(), errors.end()), params);
}

int cells_for(double length, double h)
{
    if (!(h > 0.0) || !(length > 0.0)) throw InvalidArgument("cells_for: positive length and h required");
    return std::max(1, static_cast<int>(std::ceil(length / h - 1e-9)));
}

RateTable run_sweep(const SweepConfig& cfg)
{
    const CatalogEntry& entry = find_problem(cfg.problem);
    if (cfg.values.size() < 2) throw InvalidArgument("run_sweep: need at least two sweep values");
    for (double v : cfg.values)
        if (cfg.variable == SweepVariable::H && !(v > 0.0)) throw InvalidArgument("run_sweep: h values must be positive");
    // monotonicity is checked on magnitudes so that negative eps sweeps work
    std::vector<double> mag;
    for (double v : cfg.values) mag.push_back(std::abs(v));
    for (std::size_t i = 1; i < mag.size(); ++i)
        if ((mag[i] < mag[i - 1]) != (mag[1] < mag[0]) || mag[i] == mag[i - 1])
            throw InvalidArgument("run_sweep: sweep values must be strictly monotone");
    if (cfg.variable == SweepVariable::Eps)
        for (double v : cfg.values)
            if (v == 0.0) throw InvalidArgument("run_sweep: eps must be nonzero");
    if (cfg.degree < 1 || cfg.degree > 3) throw InvalidArgument("run_sweep: degree must be 1, 2 or 3");
    if (cfg.grid < 1) throw InvalidArgument("run_sweep: grid must be positive");

    const auto outcomes = entry.radial ? radial_sweep(entry, cfg) : mixed_sweep(entry, cfg);

    RateTable t;
    auto meta = [&](std::string k, std::string v) { t.metadata.emplace_back(std::move(k), std::move(v)); };
    meta("problem", entry.id);
    meta("description", entry.description);
    meta("sweep", cfg.variable == SweepVariable::Eps ? "eps" : "h");
    if (entry.radial) {
        meta("solver", "radial fourth-order (cubic Hermite)");
        meta("norms", "L2 and H1 (first derivative) and H2 (Laplacian) weighted by r^(n-1); Linf at quadrature points");
    } else {
        meta("solver", "mixed Hermann-Miyoshi");
        meta("degree", std::to_string(cfg.degree));
        const ProblemSpec probe = entry.build(cfg.gamma);
        meta("tau", format_double(cfg.tau ? *cfg.tau : default_tau(probe.op)));
        if (probe.op == OperatorKind::InfinityLaplacian) meta("gamma", cfg.gamma ? format_double(*cfg.gamma) : "eps^2");
        meta("norms", "L2, full H1, H2 column = Hessian variable in L2, Linf at quadrature points");
    }
    if (cfg.variable == SweepVariable::Eps)
        meta("grid", std::to_string(cfg.grid));
    else
        meta("eps", format_double(cfg.eps));
    meta("warm_start", cfg.cold ? "no" : "yes");
    meta("build", VMM_BUILD_ID);

    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        RateRow row;
        row.param = quantize(cfg.values[i]);
        row.failed = !outcomes[i].ok;
        for (int c = 0; c < 4; ++c) row.error[c] = quantize(outcomes[i].err[c]);
        t.rows.push_back(row);
    }
    for (int c = 0; c < 4; ++c) {
        std::vector<std::optional<double>> col;
        for (std::size_t i = 0; i < outcomes.size(); ++i) col.push_back(outcomes[i].ok ? outcomes[i].err[c] : std::nullopt);
        const auto rates = estimate_rate(col, mag);
        for (std::size_t i = 0; i < rates.size(); ++i) t.rows[i].rate[c] = quantize(rates[i]);
    }
    if (!cfg.output.empty()) write_csv(t, cfg.output);
    return t;
}

void write_csv(const RateTable& t, std::ostream& os)
{
    for (const auto& [k, v] : t.metadata) os << "# " << k << ": " << v << '\n';
    os << "param,err_L2,err_H1,err_H2,err_Linf,rate_L2,rate_H1,rate_H2,rate_Linf\n";
    for (const auto& r : t.rows) {
        os << format_double(r.param);
        for (int c = 0; c < 4; ++c) {
            os << ',';
            if (r.failed && c == 0)
                os << "FAILED";
            else if (r.error[c])
                os << format_double(*r.error[c]);
        }
        for (int c = 0; c < 4; ++c) {
            os << ',';
            if (r.rate[c]) os << format_double(*r.rate[c]);
        }
        os << '\n';
    }
    if (!os) throw IoError("write_csv: stream error");
}

void write_csv(const RateTable& t, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw IoError("write_csv: cannot open " + path);
    write_csv(t, os);
}

RateTable read_csv(std::istream& is)
{
    RateTable t;
    std::string line;
    bool header = false;
    auto number = [](const std::string& cell) -> std::optional<double> {
        if (cell.empty()) return std::nullopt;
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0') throw IoError("read_csv: bad number '" + cell + "'");
        return v;
    };
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(": ");
            if (colon == std::string::npos) throw IoError("read_csv: bad metadata line");
            t.metadata.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
            continue;
        }
        if (!header) {
            if (line != "param,err_L2,err_H1,err_H2,err_Linf,rate_L2,rate_H1,rate_H2,rate_Linf")
                throw IoError("read_csv: unexpected header");
            header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (cells.size() != 9) throw IoError("read_csv: expected 9 cells");
        RateRow r;
        r.param = *number(cells[0]);
        r.failed = cells[1] == "FAILED";
        for (int c = 0; c < 4; ++c) {
            if (!(r.failed && c == 0)) r.error[c] = number(cells[1 + c]);
            r.rate[c] = number(cells[5 + c]);
        }
        t.rows.push_back(r);
    }
    if (!header) throw IoError("read_csv: missing header");
    return t;
}

KStarResult bisect_k_star(const FeasibilityOracle& feasible, double K_hi, double K_tol)
{
    if (!(K_hi > 0.0) || !(K_tol > 0.0)) throw InvalidArgument("bisect_k_star: K_hi and K_tol must be positive");
    KStarResult res;
    auto ask = [&](double K) {
        std::vector<KStarSample> visited;
        const bool ok = feasible(K, visited);
        bool has = false;
        for (const auto& s : visited) {
            res.samples.push_back(s);
            has = has || s.K == K;
        }
        if (!has) res.samples.push_back({K, ok});
        return ok;
    };
    auto bracket = [&] {
        double lo = -1.0, hi = std::numeric_limits<double>::infinity();
        for (const auto& s : res.samples)
            if (s.feasible)
                lo = std::max(lo, s.K);
            else
                hi = std::min(hi, s.K);
        if (lo > hi) {
            std::ostringstream msg;
            msg << "feasibility is not monotone in K; samples:";
            for (const auto& s : res.samples) msg << ' ' << s.K << (s.feasible ? "(ok)" : "(fail)");
            throw NonMonotoneError(msg.str());
        }
        res.lo = lo;
        res.hi = hi;
    };
    if (!ask(0.0)) throw InvalidArgument("bisect_k_star: K = 0 is infeasible");
    if (ask(K_hi)) throw InvalidArgument("bisect_k_star: K_hi is feasible, no bracket");
    bracket();
    while (res.hi - res.lo > K_tol) {
        ask(0.5 * (res.lo + res.hi));
        bracket();
    }
    res.estimate = 0.5 * (res.lo + res.hi);
    return res;
}

KStarResult estimate_k_star(const ProblemSpec& spec, const MixedSpace& space, double eps, const KStarOptions& opts)
{
    if (!(eps < 0.0)) throw InvalidArgument("estimate_k_star: eps must be negative");
    if (!(opts.K_step > 0.0)) throw InvalidArgument("estimate_k_star: K_step must be positive");
    std::optional<MixedState> best;
    double bestK = 0.0;
    auto at = [&](double K) {
        ProblemSpec s = spec;
        s.K = K;
        return s;
    };
    FeasibilityOracle oracle = [&](double K, std::vector<KStarSample>& visited) {
        if (!best) {
            try {
                const double start = -std::max(std::abs(opts.eps_start), std::abs(eps));
                best = continuation_solve(at(K), space, eps, start, {}, opts.mixed).state;
                bestK = K;
                return true;
            } catch (...) {
                if (!is_solver_failure(std::current_exception())) throw;
                return false;
            }
        }
        if (K < bestK) throw InternalError("estimate_k_star: query below the feasible anchor");
        MixedState st = *best;
        double k = bestK;
        while (k < K) {
            const double next = std::min(K, k + opts.K_step);
            try {
                st = newton_solve(at(next), st, opts.mixed);
            } catch (...) {
                if (!is_solver_failure(std::current_exception())) throw;
                visited.push_back({next, false});
                return false;
            }
            k = next;
            best = st;
            bestK = k;
            visited.push_back({k, true});
        }
        return true;
    };
    return bisect_k_star(oracle, opts.K_hi, opts.K_tol);
}

}  // namespace vmm
