#include <gtest/gtest.h>

#include <cmath>

#include "vmm/errors.hpp"
#include "vmm/radial.hpp"

using namespace vmm;

namespace {

RadialProblem exp_problem(int n = 2)
{
    RadialProblem p;
    p.n = n;
    p.R = 1.0;
    p.f = [](double r) { return (1.0 + r * r) * std::exp(r * r); };
    p.gR = std::exp(0.5);
    return p;
}

}  // namespace

TEST(Radial, LfClosedForm)
{
    auto p = exp_problem();
    for (double r : {0.0, 0.1, 0.5, 1.0}) EXPECT_NEAR(L_f(p, r), 0.5 * r * r * std::exp(r * r), 1e-14);
    EXPECT_THROW(L_f(p, -0.1), InvalidArgument);
}

TEST(Radial, ExactSolutionMatchesClosedForm)
{
    auto p = exp_problem();
    auto u = exact_radial_solution(p, Branch::Convex);
    for (double r : {0.0, 0.05, 0.3, 0.77, 1.0}) {
        EXPECT_NEAR(u.u(r), std::exp(0.5 * r * r), 1e-12);
        EXPECT_NEAR(u.du(r), r * std::exp(0.5 * r * r), 1e-12);
        EXPECT_NEAR(u.d2u(r), (1 + r * r) * std::exp(0.5 * r * r), 1e-10);
    }
    auto c = exact_radial_solution(p, Branch::Concave);
    EXPECT_NEAR(c.u(0.3), 2 * std::exp(0.5) - std::exp(0.045), 1e-12);
    EXPECT_THROW(exact_radial_solution(exp_problem(3), Branch::Concave), InvalidArgument);
}

TEST(Radial, ExactSolutionDeterminantIdentity)
{
    for (int n : {2, 3, 4}) {
        auto p = exp_problem(n);
        auto u = exact_radial_solution(p, Branch::Convex);
        for (double r : {0.1, 0.4, 0.9}) {
            double det = u.d2u(r) * std::pow(u.du(r) / r, n - 1);
            EXPECT_NEAR(det, p.f(r), 1e-9 * p.f(r));
        }
    }
}

TEST(Radial, ReducedSolverConvergesInEps)
{
    auto p = exp_problem();
    auto mesh = build_interval_mesh(1.0, 400);
    auto ex = exact_radial_solution(p, Branch::Convex);
    double prev = 0.0;
    for (double eps : {4e-2, 2e-2, 1e-2}) {
        RadialOptions o;
        o.eps = eps;
        auto w = solve_reduced_w(p, mesh, o);
        EXPECT_FALSE(w.log.picard_updates.empty());
        EXPECT_LE(w.log.newton_residuals.back(), o.tol);
        auto err = radial_errors(recover_u(p, w), ex, mesh);
        EXPECT_LT(err.L2, 2.0 * eps);
        if (prev > 0) EXPECT_GT(prev / err.L2, 1.6);
        prev = err.L2;
    }
}

TEST(Radial, PicardStagnationReportsHistory)
{
    auto p = exp_problem();
    auto mesh = build_interval_mesh(1.0, 50);
    RadialOptions o;
    o.eps = 1e-2;
    o.max_picard = 2;
    try {
        solve_reduced_w(p, mesh, o);
        FAIL() << "expected NonConvergenceError";
    } catch (const NonConvergenceError& e) {
        EXPECT_EQ(e.history().size(), 2u);
    }
}

TEST(Radial, FourthOrderAgreesWithReducedSolver)
{
    auto p = exp_problem();
    auto mesh = build_interval_mesh(1.0, 400);
    RadialOptions o;
    o.eps = 1e-2;
    auto h = solve_radial_fourth_order(p, mesh, o);
    auto w = solve_reduced_w(p, mesh, o);
    auto d = radial_errors(h.profile(), recover_u(p, w), mesh);
    EXPECT_LT(d.L2, 1e-6);
    EXPECT_LT(d.H1, 1e-5);
    EXPECT_NEAR(h.u(1.0), p.gR, 1e-12);
    EXPECT_NEAR(h.du(0.0), 0.0, 1e-12);
    // natural condition: Laplacian trace close to eps at R
    EXPECT_NEAR(h.profile().lap(1.0), o.eps, 5e-2);
}

TEST(Radial, ConcaveBranchIsMirrorImage)
{
    auto p = exp_problem();
    auto q = p;
    q.gR = -p.gR;
    auto mesh = build_interval_mesh(1.0, 200);
    RadialOptions neg, pos;
    neg.eps = -1e-2;
    pos.eps = 1e-2;
    auto a = solve_radial_fourth_order(p, mesh, neg);
    auto b = solve_radial_fourth_order(q, mesh, pos);
    EXPECT_LT((a.coeffs + b.coeffs).lpNorm<Eigen::Infinity>(), 1e-10);
    EXPECT_THROW(solve_radial_fourth_order(exp_problem(3), mesh, neg), InvalidArgument);
}

TEST(Radial, ConvexityBandShrinksWithEps)
{
    auto p = exp_problem();
    auto mesh = build_interval_mesh(1.0, 800);
    for (double eps : {4e-2, 1e-2}) {
        RadialOptions o;
        o.eps = eps;
        auto h = solve_radial_fourth_order(p, mesh, o);
        auto rep = convexity_report(h.profile(), mesh, eps);
        EXPECT_LE(rep.nonconvex_band, 10 * eps);
    }
}
