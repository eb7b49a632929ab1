#include <gtest/gtest.h>

#include <cmath>

#include "vmm/errors.hpp"
#include "vmm/surgery.hpp"

using namespace vmm;

namespace {

RadialProblem exp_problem()
{
    RadialProblem p;
    p.n = 2;
    p.f = [](double r) { return (1 + r * r) * std::exp(r * r); };
    p.gR = std::exp(0.5);
    return p;
}

// u = x^4 + y^2 with the matching Monge-Ampere source and exact second trace.
ProblemSpec quartic()
{
    using V2 = Eigen::Vector2d;
    auto u = [](const V2& x) { return std::pow(x(0), 4) + x(1) * x(1); };
    auto du = [](const V2& x) { return V2(4 * std::pow(x(0), 3), 2 * x(1)); };
    auto H = [](const V2& x) {
        Eigen::Matrix2d h;
        h << 12 * x(0) * x(0), 0, 0, 2;
        return h;
    };
    auto s = make_problem(OperatorKind::MongeAmpere, u, du, [](const V2& x, double e) { return 24 * x(0) * x(0) - 24 * e; });
    s.second_trace = [H](const V2& x, const V2& n, double) { return n.dot(H(x) * n); };
    s.exact = ExactSolution{u, du, H};
    return s;
}

}  // namespace

TEST(Surgery, RejectsBadConfigurations)
{
    auto p = exp_problem();
    auto mesh = build_interval_mesh(1.0, 20);
    RadialOptions o;
    o.eps = 0.05;
    SurgeryConfig c;
    c.iterations = 0;
    EXPECT_THROW(radial_surgical_solve(p, mesh, o, c), InvalidArgument);
    c.iterations = 1;
    c.c_band = 10.0;
    EXPECT_THROW(radial_surgical_solve(p, mesh, o, c), InvalidArgument);
    c.c_band = 2.0;
    o.eps = -0.05;
    EXPECT_THROW(radial_surgical_solve(p, mesh, o, c), InvalidArgument);

    auto grid = std::make_shared<const TriangleMesh>(build_rectangle_mesh({}, 4, 4));
    MixedSpace S(grid, 1);
    EXPECT_THROW(mixed_surgical_solve(quartic(), S, 0.3, c), InvalidArgument);
}

TEST(Surgery, RadialTraceShapeAndFirstEntry)
{
    auto p = exp_problem();
    auto mesh = build_interval_mesh(1.0, 100);
    auto exact = exact_radial_solution(p, Branch::Convex);
    RadialOptions o;
    o.eps = 0.01;
    SurgeryConfig c;
    c.iterations = 4;
    auto res = radial_surgical_solve(p, mesh, o, c, &exact);
    ASSERT_EQ(res.trace.size(), 5u);
    auto plain = solve_radial_fourth_order(p, mesh, o);
    auto e0 = radial_errors(plain.profile(), exact, mesh);
    EXPECT_EQ(res.trace[0].errors->L2, e0.L2);
    EXPECT_EQ(res.trace[0].boundary_laplacian, 0.01);
    for (int i = 1; i <= 4; ++i) {
        EXPECT_EQ(res.trace[i].boundary_laplacian, res.trace[i - 1].inner_sample);
        // the corrected trace moves toward the exact boundary Laplacian
        EXPECT_LT(*res.trace[i].trace_error, *res.trace[i - 1].trace_error);
        EXPECT_LT(res.trace[i].errors->L2, 1.5 * res.trace[1].errors->L2);
    }
}

TEST(Surgery, MixedExactCompatibleDataIsAFixedPoint)
{
    // u = x^2 + y^2: the exact second trace is 2 everywhere, so the corrector has nothing to fix
    using V2 = Eigen::Vector2d;
    auto u = [](const V2& x) { return x.squaredNorm(); };
    auto du = [](const V2& x) { return V2(2 * x); };
    auto spec = make_problem(OperatorKind::MongeAmpere, u, du, [](const V2&, double) { return 4.0; });
    spec.second_trace = [](const V2&, const V2&, double) { return 2.0; };
    spec.exact = ExactSolution{u, du, [](const V2&) { return Eigen::Matrix2d(2 * Eigen::Matrix2d::Identity()); }};
    auto grid = std::make_shared<const TriangleMesh>(build_rectangle_mesh({}, 16, 16));
    MixedSpace S(grid, 1);
    SurgeryConfig c;
    c.iterations = 2;
    auto res = mixed_surgical_solve(spec, S, 1e-2, c);
    ASSERT_EQ(res.trace.size(), 3u);
    for (int i = 1; i <= 2; ++i) {
        const double a = res.trace[i - 1].errors->L2, b = res.trace[i].errors->L2;
        EXPECT_LT(std::abs(b - a), 0.05 * a) << "iteration " << i << " " << a << " " << b;
    }
}

TEST(Surgery, MixedExtensionModes)
{
    auto grid = std::make_shared<const TriangleMesh>(build_rectangle_mesh({}, 8, 8));
    MixedSpace S(grid, 1);
    auto spec = quartic();
    spec.second_trace = {};  // plain eps trace: the corrector has work to do
    SurgeryConfig c;
    c.extension = Extension::NearestInnerSample;
    auto nearest = mixed_surgical_solve(spec, S, 0.02, c);
    c.extension = Extension::MaxConstant;
    auto maxc = mixed_surgical_solve(spec, S, 0.02, c);
    c.extension = Extension::LinearAlongNormal;
    auto linear = mixed_surgical_solve(spec, S, 0.02, c);
    double vmax = -1e300, lo = 1e300, hi = -1e300;
    for (const auto& tab : nearest.trace[1].sides)
        for (double v : tab.value) vmax = std::max(vmax, v);
    for (const auto& tab : maxc.trace[1].sides)
        for (double v : tab.value) EXPECT_EQ(v, vmax);
    for (const auto& tab : nearest.trace[1].sides)
        for (double v : tab.value) lo = std::min(lo, v), hi = std::max(hi, v);
    for (const auto& tab : linear.trace[1].sides)
        for (double v : tab.value) {
            EXPECT_GE(v, lo - 0.5 * (hi - lo));
            EXPECT_LE(v, hi + 0.5 * (hi - lo));
        }
    // corner nodes are shared by two sides and keep their own per-side data
    EXPECT_EQ(nearest.trace[0].sides[0].value.front(), 0.02);
    EXPECT_LT(*nearest.trace[1].trace_error, *nearest.trace[0].trace_error);
}
