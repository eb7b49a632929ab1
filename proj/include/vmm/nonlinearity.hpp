#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vmm {

enum class OperatorKind { MongeAmpere, GaussCurvature, InfinityLaplacian };

std::string to_string(OperatorKind k);

template <class Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
template <class Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

template <class Scalar>
Mat2<Scalar> cofactor(const Mat2<Scalar>& r)
{
    Mat2<Scalar> c;
    c << r(1, 1), -r(1, 0), -r(0, 1), r(0, 0);
    return c;
}

// Operator part of the residual without the source term. `source` is the
// already-evaluated source value at the point, `gamma` the regularization.
template <class Scalar>
Scalar operator_core(OperatorKind kind, const Mat2<Scalar>& r, const Vec2<Scalar>& p, Scalar source, double K,
                     double gamma)
{
    switch (kind) {
    case OperatorKind::MongeAmpere:
        return source - r.determinant();
    case OperatorKind::GaussCurvature: {
        Scalar q = Scalar(1) + p.squaredNorm();
        return -r.determinant() / (q * q) + Scalar(K) * source;
    }
    case OperatorKind::InfinityLaplacian:
        return -(p.dot(r * p)) / (p.squaredNorm() + Scalar(gamma)) + source;
    }
    return Scalar(0);
}

struct LinearizationBlocks {
    Eigen::Matrix2d F_r = Eigen::Matrix2d::Zero();
    Eigen::Vector2d F_p = Eigen::Vector2d::Zero();
    double F_z = 0.0;
};

using PointFn = std::function<double(const Eigen::Vector2d&)>;
// Source may depend on the vanishing-moment parameter.
using SourceFn = std::function<double(const Eigen::Vector2d&, double eps)>;
// Boundary value of the normal-normal second moment at (x, normal, eps).
using SecondTraceFn = std::function<double(const Eigen::Vector2d&, const Eigen::Vector2d&, double eps)>;

struct ExactSolution {
    PointFn u;
    std::function<Eigen::Vector2d(const Eigen::Vector2d&)> grad;
    std::function<Eigen::Matrix2d(const Eigen::Vector2d&)> hess;
};

struct ProblemSpec {
    OperatorKind op = OperatorKind::MongeAmpere;
    double K = 1.0;                  // Gauss curvature scale
    std::optional<double> gamma;     // infinity-Laplacian regularization; defaults to eps^2
    SourceFn source;                 // defaults to zero
    PointFn g;                       // Dirichlet data
    std::function<Eigen::Vector2d(const Eigen::Vector2d&)> g_grad;  // tangential data
    SecondTraceFn second_trace;      // defaults to eps
    std::optional<ExactSolution> exact;

    // Throws InvalidArgument on inconsistent settings.
    void validate() const;
    double gamma_for(double eps) const;
    double source_at(const Eigen::Vector2d& x, double eps) const;
    double second_trace_at(const Eigen::Vector2d& x, const Eigen::Vector2d& normal, double eps) const;
};

ProblemSpec make_problem(OperatorKind op, PointFn g, std::function<Eigen::Vector2d(const Eigen::Vector2d&)> g_grad,
                         SourceFn source = {}, double K = 1.0, std::optional<double> gamma = std::nullopt);

// Residual F(kappa, p, z, x) = core + source.
double eval_F(const ProblemSpec& spec, const Eigen::Matrix2d& kappa, const Eigen::Vector2d& p, double z,
              const Eigen::Vector2d& x, double eps);

// Partial derivatives of F with respect to the Hessian slot (symmetric matrix),
// the gradient slot and the value slot.
LinearizationBlocks eval_Fprime(const ProblemSpec& spec, const Eigen::Matrix2d& kappa, const Eigen::Vector2d& p,
                                double z, const Eigen::Vector2d& x, double eps);

// Polynomial in two variables with exact differentiation.
struct Polynomial2 {
    struct Term {
        double c;
        int a, b;  // c x^a y^b
    };
    std::vector<Term> terms;

    double operator()(const Eigen::Vector2d& x) const;
    Polynomial2 dx() const;
    Polynomial2 dy() const;
};

// Max over quadrature points of |row divergence of cof(D^2 v)|.
double cofactor_divergence_residual(const Polynomial2& v, const std::vector<Eigen::Vector2d>& points);

}  // namespace vmm
