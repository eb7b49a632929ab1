// Command-line driver: single solves, surgery, sweeps and the curvature threshold search.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vmm/errors.hpp"
#include "vmm/harness.hpp"
#include "vmm/surgery.hpp"

using namespace vmm;

namespace {

struct Common {
    std::string problem;
    double eps = 0.01;
    int grid = 16;
    int degree = 2;
    std::optional<double> tau;
    std::string gamma = "auto";
    double tol = 1e-10;
    std::string out;
};

void add_common(CLI::App* app, Common& c, const std::string& default_problem)
{
    c.problem = default_problem;
    app->add_option("--problem", c.problem, "catalog problem id")->capture_default_str();
    app->add_option("--eps", c.eps, "vanishing-moment parameter (negative: concave branch)")->capture_default_str();
    app->add_option("--grid", c.grid, "cells per side (radial: elements)")->capture_default_str()->check(
        CLI::PositiveNumber);
    app->add_option("--degree", c.degree, "polynomial degree of the mixed spaces")->capture_default_str()->check(
        CLI::Range(1, 3));
    app->add_option("--tau", c.tau, "Hessian shift (default: 1 for the infinity-Laplacian, else 0)");
    app->add_option("--gamma", c.gamma, "infinity-Laplacian regularization, number or 'auto' for eps^2")
        ->capture_default_str();
    app->add_option("--tol", c.tol, "Newton tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--out", c.out, "output path");
}

std::optional<double> parse_gamma(const std::string& s)
{
    if (s == "auto") return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size() && v > 0.0) return v;
    } catch (const std::exception&) {
    }
    throw InvalidArgument("--gamma expects a positive number or 'auto'");
}

std::vector<double> parse_list(const std::string& s)
{
    std::vector<double> v;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = std::min(s.find(',', pos), s.size());
        const std::string item = s.substr(pos, comma - pos);
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InvalidArgument("bad list entry '" + item + "'");
        }
        pos = comma + 1;
    }
    return v;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path);
    return os;
}

void print_radial_errors(const RadialErrors& e)
{
    std::printf("L2 %.6e  H1 %.6e  lap_L2 %.6e  lap_max %.6e  Linf %.6e\n", e.L2, e.H1, e.lap_L2, e.lap_max, e.Linf);
}

Branch branch_for(double eps) { return eps > 0 ? Branch::Convex : Branch::Concave; }

int run_radial(const Common& c)
{
    const CatalogEntry& entry = find_problem(c.problem);
    if (!entry.radial) throw InvalidArgument(c.problem + " is not a radial problem");
    const RadialProblem p = entry.radial_problem();
    const auto mesh = build_interval_mesh(p.R, c.grid);
    RadialOptions o;
    o.eps = c.eps;
    o.tol = c.tol;
    const HermiteState st = solve_radial_fourth_order(p, mesh, o);
    std::printf("radial %s n=%d eps=%g N=%d newton=%zu stages=%d\n", entry.id.c_str(), p.n, c.eps, c.grid,
                st.log.newton_residuals.size(), st.log.continuation_stages);
    if (p.n % 2 == 0 || c.eps > 0) print_radial_errors(radial_errors(st.profile(), exact_radial_solution(p, branch_for(c.eps)), mesh));
    const ConvexityReport cr = convexity_report(st.profile(), mesh, c.eps);
    std::printf("min lap %.6e  nonconvex band %.6e\n", cr.min_laplacian, cr.nonconvex_band);
    if (!c.out.empty()) {
        auto os = open_out(c.out);
        os << "r,u,u_r,lap\n";
        for (double r : mesh.nodes) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e,%.12e\n", r, st.u(r), st.du(r), st.profile().lap(r));
            os << buf;
        }
    }
    return 0;
}

std::shared_ptr<const TriangleMesh> planar_mesh(const CatalogEntry& entry, int grid)
{
    return std::make_shared<const TriangleMesh>(build_rectangle_mesh(entry.box, grid, grid));
}

void write_nodal(const MixedState& st, const std::string& path)
{
    auto os = open_out(path);
    os << "x,y,u\n";
    const Field2D u = st.u();
    for (const auto& v : st.space->mesh().vertices) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e\n", v(0), v(1), u.value(v));
        os << buf;
    }
}

int run_mixed(const Common& c, std::optional<double> K, double eps_start, const std::string& matrix,
              const std::string& checkpoint)
{
    const CatalogEntry& entry = find_problem(c.problem);
    if (entry.radial) throw InvalidArgument(c.problem + " is radial; use the radial subcommand");
    ProblemSpec spec = entry.build(parse_gamma(c.gamma));
    if (K) spec.K = *K;
    MixedSpace space(planar_mesh(entry, c.grid), c.degree);
    MixedOptions o;
    o.tau = c.tau;
    o.tol = c.tol;
    const double start = std::copysign(std::max(std::abs(c.eps), std::abs(eps_start)), c.eps);
    const ContinuationResult res = continuation_solve(spec, space, c.eps, start, {}, o);
    const MixedState& st = res.state;
    std::printf("mixed %s k=%d grid=%d eps=%g tau=%g stages=%zu unknowns=%d\n", entry.id.c_str(), c.degree, c.grid,
                c.eps, st.tau, res.stages.size(), space.num_free());
    if (spec.exact) {
        const MixedErrors e = mixed_errors(st, *spec.exact);
        std::printf("L2 %.6e  H1 %.6e  sigma_L2 %.6e  Linf %.6e\n", e.L2, e.H1, e.sigma_L2, e.Linf);
    }
    if (!c.out.empty()) write_nodal(st, c.out);
    if (!matrix.empty()) write_matrix_market(MixedSystem(spec, space, st.eps, st.tau).jacobian(st.x), matrix);
    if (!checkpoint.empty()) write_checkpoint(st, checkpoint);
    return 0;
}

int run_surgery(const Common& c, const SurgeryConfig& cfg)
{
    const CatalogEntry& entry = find_problem(c.problem);
    if (entry.radial) {
        const RadialProblem p = entry.radial_problem();
        const auto mesh = build_interval_mesh(p.R, c.grid);
        RadialOptions o;
        o.eps = c.eps;
        o.tol = c.tol;
        const RadialProfile exact = exact_radial_solution(p, branch_for(c.eps));
        const auto res = radial_surgical_solve(p, mesh, o, cfg, &exact);
        std::printf("iter,trace_data,inner_sample,trace_error,L2,H1,lap_L2\n");
        for (std::size_t i = 0; i < res.trace.size(); ++i) {
            const auto& s = res.trace[i];
            std::printf("%zu,%.6e,%.6e,%.6e,%.6e,%.6e,%.6e\n", i, s.boundary_laplacian, s.inner_sample, *s.trace_error,
                        s.errors->L2, s.errors->H1, s.errors->lap_L2);
        }
        return 0;
    }
    const ProblemSpec spec = entry.build(parse_gamma(c.gamma));
    MixedSpace space(planar_mesh(entry, c.grid), c.degree);
    MixedOptions o;
    o.tau = c.tau;
    o.tol = c.tol;
    const auto res = mixed_surgical_solve(spec, space, c.eps, cfg, std::copysign(0.1, c.eps), {}, o);
    std::printf("iter,trace_error,L2,H1,sigma_L2\n");
    for (std::size_t i = 0; i < res.trace.size(); ++i) {
        const auto& s = res.trace[i];
        if (s.errors)
            std::printf("%zu,%.6e,%.6e,%.6e,%.6e\n", i, *s.trace_error, s.errors->L2, s.errors->H1, s.errors->sigma_L2);
        else
            std::printf("%zu,,,,\n", i);
    }
    if (!c.out.empty()) write_nodal(res.state, c.out);
    return 0;
}

void print_table(const RateTable& t)
{
    std::cout << "param        L2           rate   H1           rate   H2           rate\n";
    for (const auto& r : t.rows) {
        std::printf("%-12.4e ", r.param);
        if (r.failed) {
            std::printf("FAILED\n");
            continue;
        }
        for (int c = 0; c < 3; ++c) {
            if (r.error[c])
                std::printf("%-12.4e ", *r.error[c]);
            else
                std::printf("%-12s ", "-");
            if (r.rate[c])
                std::printf("%-6.2f ", *r.rate[c]);
            else
                std::printf("%-6s ", "-");
        }
        std::printf("\n");
    }
}

int run_sweep_cmd(const Common& c, const std::string& eps_list, const std::string& h_list, bool cold, int coarse)
{
    if (eps_list.empty() == h_list.empty()) throw InvalidArgument("give exactly one of --eps-list and --h-list");
    SweepConfig cfg;
    cfg.problem = c.problem;
    cfg.variable = eps_list.empty() ? SweepVariable::H : SweepVariable::Eps;
    cfg.values = parse_list(eps_list.empty() ? h_list : eps_list);
    cfg.eps = c.eps;
    cfg.grid = c.grid;
    cfg.degree = c.degree;
    cfg.tau = c.tau;
    cfg.gamma = parse_gamma(c.gamma);
    cfg.tol = c.tol;
    cfg.cold = cold;
    cfg.coarse_factor = coarse;
    cfg.output = c.out;
    const RateTable t = run_sweep(cfg);
    print_table(t);
    for (const auto& r : t.rows)
        if (r.failed) return 2;
    return 0;
}

int run_kstar(const Common& c, double h, const KStarOptions& ko)
{
    const CatalogEntry& entry = find_problem(c.problem);
    if (entry.radial) throw InvalidArgument("the curvature threshold search needs a planar problem");
    const ProblemSpec spec = entry.build(std::nullopt);
    if (spec.op != OperatorKind::GaussCurvature) throw InvalidArgument("the threshold search needs a Gauss curvature problem");
    const int nx = cells_for(entry.box.x1 - entry.box.x0, h), ny = cells_for(entry.box.y1 - entry.box.y0, h);
    MixedSpace space(std::make_shared<const TriangleMesh>(build_rectangle_mesh(entry.box, nx, ny)), c.degree);
    KStarOptions o = ko;
    o.mixed.tol = c.tol;
    const KStarResult r = estimate_k_star(spec, space, c.eps, o);
    std::printf("K* in [%.4f, %.4f], estimate %.4f (%zu samples)\n", r.lo, r.hi, r.estimate, r.samples.size());
    if (!c.out.empty()) {
        auto os = open_out(c.out);
        os << "# problem: " << entry.id << "\n# eps: " << c.eps << "\n# h: " << h << "\n# degree: " << c.degree
           << "\n# method: bisection on Newton feasibility with K-continuation (construction of this tool)\n"
           << "# bracket: " << r.lo << " " << r.hi << "\nK,feasible\n";
        for (const auto& s : r.samples) os << s.K << ',' << (s.feasible ? 1 : 0) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"vanishing moment solvers for fully nonlinear second-order equations"};
    app.require_subcommand(1);

    Common radial, mixed, surgery, sweep, kstar;
    auto* radial_cmd = app.add_subcommand("radial", "radially symmetric fourth-order solve");
    add_common(radial_cmd, radial, "radial-exp");
    radial.grid = 2000;

    auto* mixed_cmd = app.add_subcommand("mixed", "mixed finite element solve on a rectangle");
    add_common(mixed_cmd, mixed, "ma-quartic");
    std::optional<double> curvature;
    double eps_start = 0.1;
    std::string matrix, checkpoint;
    mixed_cmd->add_option("--K", curvature, "Gauss curvature scale override");
    mixed_cmd->add_option("--eps-start", eps_start, "first continuation stage")->capture_default_str();
    mixed_cmd->add_option("--matrix", matrix, "write the final Jacobian in MatrixMarket format");
    mixed_cmd->add_option("--checkpoint", checkpoint, "write the final state");

    auto* surgery_cmd = app.add_subcommand("surgery", "boundary-layer surgery iterations");
    add_common(surgery_cmd, surgery, "radial-exp");
    SurgeryConfig scfg;
    std::string extension = "linear";
    surgery_cmd->add_option("--iterations", scfg.iterations, "surgery iterations")->capture_default_str();
    surgery_cmd->add_option("--band", scfg.c_band, "band width in units of eps")->capture_default_str();
    surgery_cmd->add_option("--extension", extension, "nearest, linear or max")
        ->check(CLI::IsMember({"nearest", "linear", "max"}))
        ->capture_default_str();

    auto* sweep_cmd = app.add_subcommand("sweep", "convergence sweep in eps or h");
    add_common(sweep_cmd, sweep, "ma-quartic");
    std::string eps_list, h_list;
    bool cold = false;
    int coarse = 4;
    sweep_cmd->add_option("--eps-list", eps_list, "comma-separated eps values");
    sweep_cmd->add_option("--h-list", h_list, "comma-separated mesh sizes");
    sweep_cmd->add_flag("--cold", cold, "independent solves (run concurrently)");
    sweep_cmd->add_option("--coarse-factor", coarse, "coarse grid factor for eps-sweep starts")->capture_default_str();

    auto* kstar_cmd = app.add_subcommand("kstar", "Gauss curvature threshold by bisection");
    add_common(kstar_cmd, kstar, "gauss-kstar-a");
    kstar.eps = -0.001;
    double h = 0.05;
    KStarOptions ko;
    ko.K_hi = 16.0;
    kstar_cmd->add_option("--mesh-size", h, "mesh size h")->capture_default_str();
    kstar_cmd->add_option("--k-hi", ko.K_hi, "upper end of the search interval")->capture_default_str();
    kstar_cmd->add_option("--k-tol", ko.K_tol, "final bracket width")->capture_default_str();
    kstar_cmd->add_option("--k-step", ko.K_step, "largest continuation step in K")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*radial_cmd) return run_radial(radial);
        if (*mixed_cmd) return run_mixed(mixed, curvature, eps_start, matrix, checkpoint);
        if (*surgery_cmd) {
            scfg.extension = extension == "nearest" ? Extension::NearestInnerSample
                             : extension == "max"   ? Extension::MaxConstant
                                                    : Extension::LinearAlongNormal;
            return run_surgery(surgery, scfg);
        }
        if (*sweep_cmd) return run_sweep_cmd(sweep, eps_list, h_list, cold, coarse);
        if (*kstar_cmd) return run_kstar(kstar, h, ko);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NonConvergenceError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return 2;
    } catch (const SingularMatrixError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return 2;
    } catch (const NonMonotoneError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
