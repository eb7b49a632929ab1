#include "vmm/nonlinearity.hpp"

#include <cmath>

#include "vmm/errors.hpp"

namespace vmm {

std::string to_string(OperatorKind k)
{
    switch (k) {
    case OperatorKind::MongeAmpere: return "monge-ampere";
    case OperatorKind::GaussCurvature: return "gauss-curvature";
    case OperatorKind::InfinityLaplacian: return "infinity-laplacian";
    }
    return "unknown";
}

namespace {

void check_kind(OperatorKind k)
{
    if (k != OperatorKind::MongeAmpere && k != OperatorKind::GaussCurvature && k != OperatorKind::InfinityLaplacian)
        throw NotImplementedError("unsupported operator");
}

}  // namespace

void ProblemSpec::validate() const
{
    check_kind(op);
    if (!g) throw InvalidArgument("ProblemSpec: Dirichlet data g is required");
    if (gamma && !(*gamma > 0.0)) throw InvalidArgument("ProblemSpec: gamma must be positive");
    if (op == OperatorKind::GaussCurvature && !(K >= 0.0))
        throw InvalidArgument("ProblemSpec: curvature scale K must be non-negative");
}

double ProblemSpec::gamma_for(double eps) const
{
    double gm = gamma ? *gamma : eps * eps;
    if (!(gm > 0.0)) throw InvalidArgument("ProblemSpec: gamma must be positive");
    return gm;
}

double ProblemSpec::source_at(const Eigen::Vector2d& x, double eps) const
{
    return source ? source(x, eps) : 0.0;
}

double ProblemSpec::second_trace_at(const Eigen::Vector2d& x, const Eigen::Vector2d& normal, double eps) const
{
    return second_trace ? second_trace(x, normal, eps) : eps;
}

ProblemSpec make_problem(OperatorKind op, PointFn g, std::function<Eigen::Vector2d(const Eigen::Vector2d&)> g_grad,
                         SourceFn source, double K, std::optional<double> gamma)
{
    ProblemSpec s;
    s.op = op;
    s.g = std::move(g);
    s.g_grad = std::move(g_grad);
    s.source = std::move(source);
    s.K = K;
    s.gamma = gamma;
    s.validate();
    return s;
}


double eval_F(const ProblemSpec& spec, const Eigen::Matrix2d& kappa, const Eigen::Vector2d& p, double,
              const Eigen::Vector2d& x, double eps)
{
    check_kind(spec.op);
    const double gm = spec.op == OperatorKind::InfinityLaplacian ? spec.gamma_for(eps) : 0.0;
    if (spec.op == OperatorKind::InfinityLaplacian && p.squaredNorm() + gm == 0.0)
        throw InvalidArgument("eval_F: zero gradient with zero regularization");
    return operator_core<double>(spec.op, kappa, p, spec.source_at(x, eps), spec.K, gm);
}

LinearizationBlocks eval_Fprime(const ProblemSpec& spec, const Eigen::Matrix2d& kappa, const Eigen::Vector2d& p,
                                double, const Eigen::Vector2d&, double eps)
{
    check_kind(spec.op);
    LinearizationBlocks L;
    switch (spec.op) {
    case OperatorKind::MongeAmpere:
        L.F_r = -cofactor<double>(kappa);
        break;
    case OperatorKind::GaussCurvature: {
        const double q = 1.0 + p.squaredNorm();
        L.F_r = -cofactor<double>(kappa) / (q * q);
        L.F_p = 4.0 * kappa.determinant() * p / (q * q * q);
        break;
    }
    case OperatorKind::InfinityLaplacian: {
        const double d = p.squaredNorm() + spec.gamma_for(eps);
        const Eigen::Vector2d kp = 0.5 * (kappa + kappa.transpose()) * p;
        L.F_r = -(p * p.transpose()) / d;
        L.F_p = -2.0 * kp / d + 2.0 * p.dot(kp) * p / (d * d);
        break;
    }
    }
    return L;
}

double Polynomial2::operator()(const Eigen::Vector2d& x) const
{
    double s = 0.0;
    for (const auto& t : terms) s += t.c * std::pow(x.x(), t.a) * std::pow(x.y(), t.b);
    return s;
}

Polynomial2 Polynomial2::dx() const
{
    Polynomial2 d;
    for (const auto& t : terms)
        if (t.a > 0) d.terms.push_back({t.c * t.a, t.a - 1, t.b});
    return d;
}

Polynomial2 Polynomial2::dy() const
{
    Polynomial2 d;
    for (const auto& t : terms)
        if (t.b > 0) d.terms.push_back({t.c * t.b, t.a, t.b - 1});
    return d;
}

double cofactor_divergence_residual(const Polynomial2& v, const std::vector<Eigen::Vector2d>& points)
{
    // cof(D^2 v) = [[v_yy, -v_xy], [-v_xy, v_xx]]
    const Polynomial2 vxx = v.dx().dx(), vxy = v.dx().dy(), vyy = v.dy().dy();
    const Polynomial2 r1a = vyy.dx(), r1b = vxy.dy(), r2a = vxy.dx(), r2b = vxx.dy();
    double m = 0.0;
    for (const auto& x : points) {
        m = std::max(m, std::abs(r1a(x) - r1b(x)));
        m = std::max(m, std::abs(-r2a(x) + r2b(x)));
    }
    return m;
}

}  // namespace vmm
