#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "vmm/mesh.hpp"

namespace vmm {

// Radially symmetric Monge-Ampere problem on the n-ball of radius R.
struct RadialProblem {
    int n = 2;
    double R = 1.0;
    std::function<double(double)> f;
    double gR = 0.0;

    void validate() const;
};

// int_0^r t^{n-1} f(t) dt by adaptive Gauss quadrature.
double L_f(const RadialProblem& problem, double r);

// Callable bundle describing a radial profile.
struct RadialProfile {
    int n = 2;
    std::function<double(double)> u, du, d2u;
    double lap(double r) const;
};

enum class Branch { Convex, Concave };

// Closed-form limit solution built from L_f with dense panel quadrature.
// The concave branch exists only for even n.
RadialProfile exact_radial_solution(const RadialProblem& problem, Branch branch, int panels = 4096);

struct RadialOptions {
    double eps = 1e-2;
    std::optional<double> boundary_laplacian;  // defaults to eps
    double tol = 1e-10;
    int max_picard = 500;
    int max_newton = 40;
    double picard_relaxation = 0.0;  // 0 selects 1/n
    double continuation_start = 0.1;
    double continuation_ratio = 0.5;

    double trace() const { return boundary_laplacian ? *boundary_laplacian : eps; }
};

struct IterationLog {
    std::vector<double> picard_updates;
    std::vector<double> newton_residuals;
    int continuation_stages = 0;
};

// P2 Lagrange coefficients of w = r^{n-1} u_r on an interval mesh.
struct ReducedState {
    IntervalMesh mesh;
    int n = 2;
    double eps = 0.0;
    Eigen::VectorXd coeffs;  // node i -> 2i, midpoint of element e -> 2e+1
    IterationLog log;

    double w(double r) const;
    double dw(double r) const;
};

ReducedState solve_reduced_w(const RadialProblem& problem, const IntervalMesh& mesh, const RadialOptions& opts);

// u(r) = gR - int_r^R s^{1-n} w(s) ds.
RadialProfile recover_u(const RadialProblem& problem, const ReducedState& w);

// Cubic Hermite coefficients of u: node i -> value 2i, slope 2i+1.
struct HermiteState {
    IntervalMesh mesh;
    int n = 2;
    double eps = 0.0;
    Eigen::VectorXd coeffs;
    IterationLog log;

    double u(double r) const;
    double du(double r) const;
    double d2u(double r) const;
    RadialProfile profile() const;
};

// Fourth-order radial problem with u(R) = gR, u_r(0) = 0 and Laplacian trace at R.
// Negative eps selects the concave branch. A warm start skips the eps-continuation.
HermiteState solve_radial_fourth_order(const RadialProblem& problem, const IntervalMesh& mesh,
                                       const RadialOptions& opts, const HermiteState* warm_start = nullptr);

struct RadialErrors {
    double L2 = 0, H1 = 0, lap_L2 = 0, lap_max = 0, Linf = 0;
};

// Weighted (r^{n-1} dr) errors sampled with Gauss points on every element.
RadialErrors radial_errors(const RadialProfile& uh, const RadialProfile& exact, const IntervalMesh& mesh,
                           int points_per_element = 6);

struct ConvexityReport {
    double min_laplacian = 0.0;
    double min_second_derivative = 0.0;
    double nonconvex_band = 0.0;  // R - inf{r : u_rr(r) < 0}, zero when u_rr >= 0
    double eps = 0.0;
};

ConvexityReport convexity_report(const RadialProfile& uh, const IntervalMesh& mesh, double eps,
                                 int points_per_element = 6);

}  // namespace vmm
