#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "vmm/errors.hpp"
#include "vmm/harness.hpp"

using namespace vmm;

namespace {

// Truncated bivariate Taylor polynomial of total order 4 around a point.
struct Jet {
    static constexpr int N = 4;
    std::array<std::array<double, N + 1>, N + 1> c{};  // c[i][j]: coefficient of dx^i dy^j

    static Jet constant(double v)
    {
        Jet j;
        j.c[0][0] = v;
        return j;
    }
    static Jet variable(double v, int axis)
    {
        Jet j = constant(v);
        (axis == 0 ? j.c[1][0] : j.c[0][1]) = 1.0;
        return j;
    }
    // partial derivative d^(i+j) / dx^i dy^j at the expansion point
    double d(int i, int j) const { return c[i][j] * std::tgamma(i + 1) * std::tgamma(j + 1); }
};

Jet operator+(Jet a, const Jet& b)
{
    for (int i = 0; i <= Jet::N; ++i)
        for (int j = 0; i + j <= Jet::N; ++j) a.c[i][j] += b.c[i][j];
    return a;
}
Jet operator*(double s, Jet a)
{
    for (auto& row : a.c)
        for (auto& v : row) v *= s;
    return a;
}
Jet operator-(const Jet& a, const Jet& b) { return a + (-1.0) * b; }
Jet operator*(const Jet& a, const Jet& b)
{
    Jet r;
    for (int i = 0; i <= Jet::N; ++i)
        for (int j = 0; i + j <= Jet::N; ++j)
            for (int k = 0; i + j + k <= Jet::N; ++k)
                for (int l = 0; i + j + k + l <= Jet::N; ++l) r.c[i + k][j + l] += a.c[i][j] * b.c[k][l];
    return r;
}

// g(a) with derivatives g^(m)(a0) given, via g(a0 + h) = sum g^(m)(a0) h^m / m!
Jet compose(const Jet& a, const std::array<double, Jet::N + 1>& derivs)
{
    Jet h = a;
    h.c[0][0] = 0.0;
    Jet r = Jet::constant(derivs[0]), p = Jet::constant(1.0);
    double fact = 1.0;
    for (int m = 1; m <= Jet::N; ++m) {
        p = p * h;
        fact *= m;
        r = r + (derivs[m] / fact) * p;
    }
    return r;
}
Jet exp(const Jet& a)
{
    const double e = std::exp(a.c[0][0]);
    return compose(a, {e, e, e, e, e});
}
Jet cos(const Jet& a)
{
    const double c = std::cos(a.c[0][0]), s = std::sin(a.c[0][0]);
    return compose(a, {c, -s, -c, s, c});
}
Jet pow(const Jet& a, int n)
{
    Jet r = Jet::constant(1.0);
    for (int i = 0; i < n; ++i) r = r * a;
    return r;
}

using JetFn = std::function<Jet(const Jet&, const Jet&)>;

const std::map<std::string, JetFn>& reference_solutions()
{
    static const std::map<std::string, JetFn> m = {
        {"ma-quadratic", [](const Jet& x, const Jet& y) { return x * x + y * y; }},
        {"ma-quadratic-limit", [](const Jet& x, const Jet& y) { return x * x + y * y; }},
        {"ma-quartic", [](const Jet& x, const Jet& y) { return pow(x, 4) + y * y; }},
        {"ma-exp", [](const Jet& x, const Jet& y) { return exp(0.5 * (x * x + y * y)); }},
        {"gauss-exp", [](const Jet& x, const Jet& y) { return exp(0.5 * (x * x + y * y)); }},
        {"gauss-poly", [](const Jet& x, const Jet& y) { return 0.125 * pow(x * x + y * y, 4); }},
        {"inflap-smooth", [](const Jet& x, const Jet& y) { return x * x + y * y; }},
        {"inflap-cos", [](const Jet& x, const Jet& y) { return cos(x) - cos(y); }},
    };
    return m;
}

// Entries whose exact solution is the eps -> 0 limit rather than a solution for every eps.
bool limit_only(const std::string& id) { return id == "ma-quadratic-limit" || id == "ma-exp" || id == "inflap-smooth"; }

}  // namespace

TEST(Catalog, IdsAreUniqueAndLookupWorks)
{
    std::set<std::string> ids;
    for (const auto& e : catalog()) EXPECT_TRUE(ids.insert(e.id).second) << e.id;
    EXPECT_EQ(&find_problem("ma-quartic"), &find_problem("ma-quartic"));
    EXPECT_THROW(find_problem("no-such-problem"), InvalidArgument);
}

TEST(Catalog, ExactSolutionsSatisfyTheStrongEquation)
{
    std::mt19937 rng(7);
    for (const auto& entry : catalog()) {
        if (entry.radial) continue;
        for (std::optional<double> gamma : {std::optional<double>{}, std::optional<double>{1e-4}}) {
            const ProblemSpec spec = entry.build(gamma);
            if (!spec.exact) {
                EXPECT_EQ(reference_solutions().count(entry.id), 0u) << entry.id;
                continue;
            }
            ASSERT_EQ(reference_solutions().count(entry.id), 1u) << entry.id;
            const JetFn& ref = reference_solutions().at(entry.id);
            std::uniform_real_distribution<double> ux(entry.box.x0, entry.box.x1), uy(entry.box.y0, entry.box.y1);
            for (int s = 0; s < 100; ++s) {
                const Eigen::Vector2d x(ux(rng), uy(rng));
                const Jet J = ref(Jet::variable(x(0), 0), Jet::variable(x(1), 1));
                const double u = J.d(0, 0);
                const Eigen::Vector2d p(J.d(1, 0), J.d(0, 1));
                Eigen::Matrix2d H;
                H << J.d(2, 0), J.d(1, 1), J.d(1, 1), J.d(0, 2);
                const double bilap = J.d(4, 0) + 2.0 * J.d(2, 2) + J.d(0, 4);
                const double scale = 1.0 + std::abs(u) + p.norm() + H.norm() + std::abs(bilap);

                EXPECT_NEAR(spec.exact->u(x), u, 1e-12 * scale) << entry.id;
                EXPECT_LE((spec.exact->grad(x) - p).norm(), 1e-12 * scale) << entry.id;
                EXPECT_LE((spec.exact->hess(x) - H).norm(), 1e-12 * scale) << entry.id;
                EXPECT_NEAR(spec.g(x), u, 1e-12 * scale) << entry.id;

                for (double eps : {1e-1, 1e-2, 1e-3}) {
                    const double res = eval_F(spec, H, p, u, x, eps) + (limit_only(entry.id) ? 0.0 : eps * bilap);
                    // limit solutions solve the first-order equation exactly
                    EXPECT_NEAR(res, 0.0, 1e-8 * scale) << entry.id << " eps " << eps;
                }
                if (!limit_only(entry.id)) {
                    const Eigen::Vector2d nu = Eigen::Vector2d(1.0, 0.0);
                    EXPECT_NEAR(spec.second_trace_at(x, nu, 0.01), H(0, 0), 1e-12 * scale) << entry.id;
                }
            }
        }
    }
}

TEST(Catalog, RadialSourcesMatchTheExponentialProfile)
{
    for (const char* id : {"radial-exp", "radial-exp-n4"}) {
        const RadialProblem p = find_problem(id).radial_problem();
        EXPECT_NEAR(p.gR, std::exp(0.5), 1e-15);
        for (double r : {0.1, 0.37, 0.8, 1.0}) {
            const double e = std::exp(0.5 * r * r);
            const double urr = (1 + r * r) * e, ur_over_r = e;
            EXPECT_NEAR(p.f(r), urr * std::pow(ur_over_r, p.n - 1), 1e-12 * p.f(r)) << id;
        }
    }
}

TEST(Rates, Examples)
{
    auto r = estimate_rate(std::vector<double>{4.0, 1.0}, {2.0, 1.0});
    ASSERT_TRUE(r[1]);
    EXPECT_NEAR(*r[1], 2.0, 1e-14);
    EXPECT_FALSE(r[0]);

    r = estimate_rate(std::vector<double>{1.0, 0.25, 0.0625}, {1.0, 0.5, 0.25});
    EXPECT_NEAR(*r[1], 2.0, 1e-14);
    EXPECT_NEAR(*r[2], 2.0, 1e-14);

    r = estimate_rate(std::vector<double>{1.99e-2, 7.36e-3}, {2.5e-2, 1e-2});
    EXPECT_NEAR(*r[1], 1.09, 5e-3);
}

TEST(Rates, UndefinedAndInvalidInputs)
{
    auto r = estimate_rate(std::vector<double>{1.0, 0.0, 0.5}, {1.0, 0.5, 0.25});
    EXPECT_FALSE(r[1]);
    EXPECT_FALSE(r[2]);
    r = estimate_rate(std::vector<std::optional<double>>{1.0, std::nullopt, 0.25, 0.0625}, {1.0, 0.5, 0.25, 0.125});
    EXPECT_FALSE(r[1]);
    EXPECT_FALSE(r[2]);
    EXPECT_NEAR(*r[3], 2.0, 1e-14);
    EXPECT_THROW(estimate_rate(std::vector<double>{1.0}, {1.0}), InvalidArgument);
    EXPECT_THROW(estimate_rate(std::vector<double>{1.0, 2.0}, {1.0}), InvalidArgument);
    EXPECT_THROW(estimate_rate(std::vector<double>{1.0, 2.0, 3.0}, {1.0, 0.5, 0.7}), InvalidArgument);
    EXPECT_THROW(estimate_rate(std::vector<double>{1.0, 2.0}, {1.0, 1.0}), InvalidArgument);
}

TEST(Rates, CellsFor)
{
    EXPECT_EQ(cells_for(1.0, 0.1), 10);
    EXPECT_EQ(cells_for(1.0, 0.025), 40);
    EXPECT_EQ(cells_for(1.14, 0.05), 23);
    EXPECT_EQ(cells_for(1.0, 3.0), 1);
    EXPECT_THROW(cells_for(1.0, 0.0), InvalidArgument);
}

TEST(Csv, RoundTripIsExact)
{
    RateTable t;
    t.metadata = {{"problem", "ma-quartic"}, {"sweep", "h"}};
    RateRow a;
    a.param = 0.125;
    a.error = {1.234567e-3, 2.5e-2, std::nullopt, 4.0e-3};
    RateRow b;
    b.param = 0.0625;
    b.failed = true;
    RateRow c;
    c.param = 0.03125;
    c.error = {3.0e-4, 1.2e-2, 7.0e-1, 1.0e-3};
    c.rate = {2.0, 1.0, std::nullopt, 1.9};
    t.rows = {a, b, c};

    std::ostringstream os;
    write_csv(t, os);
    std::istringstream is(os.str());
    const RateTable back = read_csv(is);
    EXPECT_EQ(back.metadata, t.metadata);
    ASSERT_EQ(back.rows.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back.rows[i].param, t.rows[i].param);
        EXPECT_EQ(back.rows[i].failed, t.rows[i].failed);
        EXPECT_EQ(back.rows[i].error, t.rows[i].error);
        EXPECT_EQ(back.rows[i].rate, t.rows[i].rate);
    }
    std::ostringstream again;
    write_csv(back, again);
    EXPECT_EQ(again.str(), os.str());
    EXPECT_NE(os.str().find("FAILED"), std::string::npos);
}

TEST(Csv, RejectsMalformedInput)
{
    std::istringstream no_header("1,2,3\n");
    EXPECT_THROW(read_csv(no_header), IoError);
    std::istringstream short_row("param,err_L2,err_H1,err_H2,err_Linf,rate_L2,rate_H1,rate_H2,rate_Linf\n1,2\n");
    EXPECT_THROW(read_csv(short_row), IoError);
    std::istringstream bad_number("param,err_L2,err_H1,err_H2,err_Linf,rate_L2,rate_H1,rate_H2,rate_Linf\n1,x,,,,,,,\n");
    EXPECT_THROW(read_csv(bad_number), IoError);
}

TEST(Sweep, RadialEpsSweepStructureAndDeterminism)
{
    SweepConfig cfg;
    cfg.problem = "radial-exp";
    cfg.values = {1e-1, 5e-2, 2.5e-2};
    cfg.grid = 200;
    const RateTable t = run_sweep(cfg);
    ASSERT_EQ(t.rows.size(), 3u);
    for (const auto& r : t.rows) {
        EXPECT_FALSE(r.failed);
        for (const auto& e : r.error) ASSERT_TRUE(e);
    }
    EXPECT_FALSE(t.rows[0].rate[kColL2]);
    ASSERT_TRUE(t.rows[2].rate[kColL2]);
    EXPECT_GT(*t.rows[2].rate[kColL2], 0.5);
    EXPECT_LT(*t.rows[2].error[kColL2], *t.rows[0].error[kColL2]);

    std::ostringstream a, b;
    write_csv(t, a);
    write_csv(run_sweep(cfg), b);
    EXPECT_EQ(a.str(), b.str());

    cfg.cold = true;
    std::ostringstream c;
    write_csv(run_sweep(cfg), c);
    std::istringstream ic(c.str());
    const RateTable tc = read_csv(ic);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_NEAR(*tc.rows[i].error[kColL2], *t.rows[i].error[kColL2], 1e-6 * *t.rows[i].error[kColL2]);
}

TEST(Sweep, MixedHSweepWarmAndColdAgree)
{
    SweepConfig cfg;
    cfg.problem = "ma-quartic";
    cfg.variable = SweepVariable::H;
    cfg.values = {0.5, 0.25, 0.125};
    cfg.eps = 1e-3;
    cfg.degree = 1;
    const RateTable warm = run_sweep(cfg);
    cfg.cold = true;
    const RateTable cold = run_sweep(cfg);
    for (std::size_t i = 0; i < 3; ++i) {
        ASSERT_FALSE(warm.rows[i].failed);
        ASSERT_FALSE(cold.rows[i].failed);
        EXPECT_NEAR(*warm.rows[i].error[kColL2], *cold.rows[i].error[kColL2], 1e-5 * *cold.rows[i].error[kColL2]);
    }
    EXPECT_GT(*warm.rows[2].rate[kColL2], 1.5);
}

TEST(Sweep, RejectsBadConfigurations)
{
    SweepConfig cfg;
    cfg.problem = "ma-quartic";
    cfg.values = {1e-2};
    EXPECT_THROW(run_sweep(cfg), InvalidArgument);
    cfg.values = {1e-2, 2e-2, 1e-3};
    EXPECT_THROW(run_sweep(cfg), InvalidArgument);
    cfg.values = {1e-2, 0.0};
    EXPECT_THROW(run_sweep(cfg), InvalidArgument);
    cfg.problem = "nope";
    cfg.values = {1e-2, 1e-3};
    EXPECT_THROW(run_sweep(cfg), InvalidArgument);
}

TEST(KStar, BisectionBracketsAThreshold)
{
    const double threshold = 2.0713;
    int calls = 0;
    auto oracle = [&](double K, std::vector<KStarSample>&) {
        ++calls;
        return K <= threshold;
    };
    const KStarResult r = bisect_k_star(oracle, 4.0, 0.1);
    EXPECT_LE(r.hi - r.lo, 0.1);
    EXPECT_LE(r.lo, threshold);
    EXPECT_GT(r.hi, threshold);
    EXPECT_EQ(r.estimate, 0.5 * (r.lo + r.hi));
    EXPECT_EQ(static_cast<int>(r.samples.size()), calls);

    const KStarResult fine = bisect_k_star(oracle, 4.0, 0.05);
    EXPECT_LE(fine.hi - fine.lo, 0.05);
    EXPECT_LE(fine.lo, threshold);
    EXPECT_GT(fine.hi, threshold);
}

TEST(KStar, SubstepSamplesTightenTheBracket)
{
    // the oracle walks up from zero in steps of 0.25 and reports every step
    auto oracle = [](double K, std::vector<KStarSample>& visited) {
        for (double k = 0.25; k < K; k += 0.25) visited.push_back({k, k <= 1.3});
        visited.push_back({K, K <= 1.3});
        return K <= 1.3;
    };
    const KStarResult r = bisect_k_star(oracle, 4.0, 0.1);
    EXPECT_LE(r.hi - r.lo, 0.1);
    EXPECT_LE(r.lo, 1.3);
    EXPECT_GT(r.hi, 1.3);
}

TEST(KStar, ContractViolations)
{
    auto never = [](double, std::vector<KStarSample>&) { return false; };
    EXPECT_THROW(bisect_k_star(never, 4.0, 0.1), InvalidArgument);
    auto always = [](double, std::vector<KStarSample>&) { return true; };
    EXPECT_THROW(bisect_k_star(always, 4.0, 0.1), InvalidArgument);
    // substeps on the way to K_hi: infeasible at 1 but feasible again at 2
    auto holes = [](double K, std::vector<KStarSample>& visited) {
        if (K > 2.0) {
            visited.push_back({1.0, false});
            visited.push_back({2.0, true});
        }
        return K < 1.0;
    };
    EXPECT_THROW(bisect_k_star(holes, 4.0, 0.1), NonMonotoneError);
    EXPECT_THROW(bisect_k_star(always, 0.0, 0.1), InvalidArgument);
}
