#include "vmm/radial.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "vmm/basis.hpp"
#include "vmm/errors.hpp"
#include "vmm/newton.hpp"
#include "vmm/quadrature.hpp"
#include "vmm/sparse.hpp"

namespace vmm {

namespace {

// Running integral of g on [a, b] tabulated on uniform panels.
class CumulativeIntegral {
public:
    CumulativeIntegral(std::function<double(double)> g, double a, double b, int panels)
        : g_(std::move(g)), a_(a), h_((b - a) / panels), rule_(gauss_legendre(10)), values_(panels + 1, 0.0)
    {
        for (int i = 0; i < panels; ++i) values_[i + 1] = values_[i] + piece(a_ + i * h_, a_ + (i + 1) * h_);
    }

    double operator()(double r) const
    {
        const int panels = static_cast<int>(values_.size()) - 1;
        int i = std::clamp(static_cast<int>(std::floor((r - a_) / h_)), 0, panels - 1);
        return values_[i] + piece(a_ + i * h_, r);
    }

    double total() const { return values_.back(); }

private:
    double piece(double lo, double hi) const
    {
        double s = 0.0;
        for (std::size_t q = 0; q < rule_.points.size(); ++q) s += rule_.weights[q] * g_(lo + rule_.points[q] * (hi - lo));
        return s * (hi - lo);
    }

    std::function<double(double)> g_;
    double a_, h_;
    QuadratureRule1D rule_;
    std::vector<double> values_;
};

double powi(double x, int p)
{
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

}  // namespace

void RadialProblem::validate() const
{
    if (n < 1) throw InvalidArgument("RadialProblem: dimension must be at least 1");
    if (!(R > 0.0)) throw InvalidArgument("RadialProblem: radius must be positive");
    if (!f) throw InvalidArgument("RadialProblem: source is required");
}

double L_f(const RadialProblem& problem, double r)
{
    problem.validate();
    if (r < 0.0) throw InvalidArgument("L_f: negative radius");
    if (r == 0.0) return 0.0;
    const auto rule = gauss_legendre(10);
    auto composite = [&](int m) {
        double s = 0.0, h = r / m;
        for (int i = 0; i < m; ++i)
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                double t = (i + rule.points[q]) * h;
                s += rule.weights[q] * h * powi(t, problem.n - 1) * problem.f(t);
            }
        return s;
    };
    double prev = composite(1);
    for (int m = 2; m <= 8192; m *= 2) {
        double cur = composite(m);
        if (std::abs(cur - prev) <= 1e-15 * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

double RadialProfile::lap(double r) const
{
    if (r <= 1e-14) return n * d2u(r);
    return d2u(r) + (n - 1) * du(r) / r;
}

RadialProfile exact_radial_solution(const RadialProblem& problem, Branch branch, int panels)
{
    problem.validate();
    if (branch == Branch::Concave && problem.n % 2 != 0)
        throw InvalidArgument("exact_radial_solution: concave branch needs even dimension");
    const int n = problem.n;
    const double s = branch == Branch::Convex ? 1.0 : -1.0;
    auto f = problem.f;
    auto Lf = std::make_shared<CumulativeIntegral>([f, n](double t) { return powi(t, n - 1) * f(t); }, 0.0,
                                                   problem.R, panels);
    auto du = [Lf, n, s](double r) { return s * std::pow(std::max(0.0, n * (*Lf)(r)), 1.0 / n); };
    auto U = std::make_shared<CumulativeIntegral>(du, 0.0, problem.R, panels);
    const double gR = problem.gR;
    RadialProfile p;
    p.n = n;
    p.du = du;
    p.u = [U, gR](double r) { return gR - (U->total() - (*U)(r)); };
    p.d2u = [Lf, n, s, f](double r) {
        if (r <= 1e-14) return s * std::pow(f(0.0), 1.0 / n);
        const double L = std::max((*Lf)(r), 1e-300);
        return s * std::pow(n * L, (1.0 - n) / n) * powi(r, n - 1) * f(r);
    };
    return p;
}

// ---------------------------------------------------------------------------
// reduced second-order problem for w = r^{n-1} u_r

double ReducedState::w(double r) const
{
    static const LagrangeInterval P2(2);
    const int e = mesh.locate(r);
    const double a = mesh.left(e), b = mesh.right(e);
    const auto v = P2.eval(std::clamp((r - a) / (b - a), 0.0, 1.0));
    return v.value(0) * coeffs(2 * e) + v.value(1) * coeffs(2 * e + 1) + v.value(2) * coeffs(2 * e + 2);
}

double ReducedState::dw(double r) const
{
    static const LagrangeInterval P2(2);
    const int e = mesh.locate(r);
    const double a = mesh.left(e), b = mesh.right(e);
    const auto v = P2.eval(std::clamp((r - a) / (b - a), 0.0, 1.0));
    return (v.d1(0) * coeffs(2 * e) + v.d1(1) * coeffs(2 * e + 1) + v.d1(2) * coeffs(2 * e + 2)) / (b - a);
}

namespace {

struct ReducedAssembly {
    const RadialProblem& prob;
    const IntervalMesh& mesh;
    double eps, trace;
    QuadratureRule1D rule = gauss_legendre(5);
    LagrangeInterval P2{2};
    std::vector<double> Lq;  // L_f at every quadrature point, element-major

    ReducedAssembly(const RadialProblem& p, const IntervalMesh& m, double e, double tr) : prob(p), mesh(m), eps(e), trace(tr)
    {
        const int n = prob.n;
        auto f = prob.f;
        CumulativeIntegral Lf([f, n](double t) { return powi(t, n - 1) * f(t); }, 0.0, mesh.R,
                              std::max(64, 4 * mesh.num_elements()));
        for (int e2 = 0; e2 < mesh.num_elements(); ++e2)
            for (double t : rule.points) Lq.push_back(Lf(mesh.left(e2) + t * (mesh.right(e2) - mesh.left(e2))));
    }

    int ndofs() const { return 2 * mesh.num_elements() + 1; }

    // mode 0: Newton residual/Jacobian; mode 1: Picard matrix frozen at psi, rhs in `res`
    void build(const Eigen::VectorXd& psi, int mode, Eigen::VectorXd& res, SparseMatrix* J) const
    {
        const int n = prob.n, nd = ndofs();
        res = Eigen::VectorXd::Zero(nd);
        std::vector<Triplet> trips;
        for (int e = 0; e < mesh.num_elements(); ++e) {
            const double a = mesh.left(e), h = mesh.right(e) - a;
            const int dofs[3] = {2 * e, 2 * e + 1, 2 * e + 2};
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const double r = a + rule.points[q] * h, wq = rule.weights[q] * h;
                const auto v = P2.eval(rule.points[q]);
                double ps = 0.0, dps = 0.0;
                for (int i = 0; i < 3; ++i) {
                    ps += v.value(i) * psi(dofs[i]);
                    dps += v.d1(i) * psi(dofs[i]) / h;
                }
                const double rw = std::pow(r, n * (n - 1));
                const double L = Lq[e * rule.points.size() + q];
                for (int i = 0; i < 3; ++i) {
                    const double chi = v.value(i), dchi = v.d1(i) / h;
                    if (mode == 0)
                        res(dofs[i]) += wq * (eps * dps * dchi + eps * (n - 1) / r * dps * chi +
                                              powi(ps, n) / (n * rw) * chi - L * chi);
                    else
                        res(dofs[i]) += wq * L * chi;
                    if (!J) continue;
                    for (int j = 0; j < 3; ++j) {
                        const double phi = v.value(j), dphi = v.d1(j) / h;
                        const double react = mode == 0 ? powi(ps, n - 1) / rw : powi(ps, n - 1) / (n * rw);
                        trips.push_back({dofs[i], dofs[j], wq * (eps * dphi * dchi + eps * (n - 1) / r * dphi * chi +
                                                                 react * phi * chi)});
                    }
                }
            }
        }
        const double flux = eps * powi(mesh.R, n - 1) * trace;
        if (mode == 0)
            res(nd - 1) -= flux;
        else
            res(nd - 1) += flux;
        // w(0) = 0
        res(0) = mode == 0 ? psi(0) : 0.0;
        if (J) {
            std::erase_if(trips, [](const Triplet& t) { return t.row == 0; });
            trips.push_back({0, 0, 1.0});
            *J = SparseMatrix::from_triplets(nd, nd, trips);
        }
    }
};

}  // namespace

ReducedState solve_reduced_w(const RadialProblem& problem, const IntervalMesh& mesh, const RadialOptions& opts)
{
    problem.validate();
    if (!(opts.eps > 0.0)) throw InvalidArgument("solve_reduced_w: eps must be positive");
    const int n = problem.n;
    ReducedAssembly A(problem, mesh, opts.eps, opts.trace());
    const int nd = A.ndofs();

    ReducedState st;
    st.mesh = mesh;
    st.n = n;
    st.eps = opts.eps;
    st.coeffs.resize(nd);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const double a = mesh.left(e), b = mesh.right(e);
        st.coeffs(2 * e) = opts.trace() / n * powi(a, n);
        st.coeffs(2 * e + 1) = opts.trace() / n * powi(0.5 * (a + b), n);
    }
    st.coeffs(nd - 1) = opts.trace() / n * powi(mesh.R, n);

    // relaxed Picard: w^n -> (psi^k)^{n-1} psi^{k+1}
    const double omega = opts.picard_relaxation > 0.0 ? opts.picard_relaxation : 1.0 / n;
    const double stop = std::sqrt(opts.tol);
    bool picard_done = false;
    for (int k = 0; k < opts.max_picard; ++k) {
        Eigen::VectorXd rhs;
        SparseMatrix M;
        A.build(st.coeffs, 1, rhs, &M);
        const Eigen::VectorXd next = (1.0 - omega) * st.coeffs + omega * solve(M, rhs).x;
        const double upd = (next - st.coeffs).lpNorm<Eigen::Infinity>() / std::max(1e-300, next.lpNorm<Eigen::Infinity>());
        st.coeffs = next;
        st.log.picard_updates.push_back(upd);
        if (!std::isfinite(upd)) break;
        if (upd < stop) {
            picard_done = true;
            break;
        }
    }
    if (!picard_done)
        throw NonConvergenceError("solve_reduced_w: Picard iteration stagnated", st.log.picard_updates);

    Eigen::VectorXd load;
    {
        Eigen::VectorXd zero = Eigen::VectorXd::Zero(nd);
        A.build(zero, 1, load, nullptr);
    }
    NonlinearSystem sys;
    sys.residual = [&A](const Eigen::VectorXd& x) {
        Eigen::VectorXd r;
        A.build(x, 0, r, nullptr);
        return r;
    };
    sys.jacobian = [&A](const Eigen::VectorXd& x) {
        Eigen::VectorXd r;
        SparseMatrix J;
        A.build(x, 0, r, &J);
        return J;
    };
    auto res = newton_solve(sys, st.coeffs, load.norm(), {opts.tol, opts.max_newton, 8});
    st.coeffs = res.x;
    st.log.newton_residuals = res.history;
    return st;
}

RadialProfile recover_u(const RadialProblem& problem, const ReducedState& w)
{
    problem.validate();
    const int n = problem.n;
    auto W = std::make_shared<ReducedState>(w);
    const auto& mesh = W->mesh;
    const auto rule = gauss_legendre(8);
    auto seg = [W, n, rule](double lo, double hi) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double t = lo + rule.points[q] * (hi - lo);
            s += rule.weights[q] * W->w(t) / powi(t, n - 1);
        }
        return s * (hi - lo);
    };
    auto U = std::make_shared<std::vector<double>>(mesh.num_nodes());
    (*U)[mesh.num_nodes() - 1] = problem.gR;
    for (int i = mesh.num_nodes() - 2; i >= 0; --i) (*U)[i] = (*U)[i + 1] - seg(mesh.nodes[i], mesh.nodes[i + 1]);

    RadialProfile p;
    p.n = n;
    p.u = [W, U, seg](double r) {
        const int e = W->mesh.locate(r);
        return (*U)[e + 1] - seg(r, W->mesh.right(e));
    };
    p.du = [W, n](double r) { return r <= 1e-14 ? 0.0 : W->w(r) / powi(r, n - 1); };
    p.d2u = [W, n](double r) {
        if (r <= 1e-14) return W->dw(r) / n;
        return W->dw(r) / powi(r, n - 1) - (n - 1) * W->w(r) / powi(r, n);
    };
    return p;
}

// ---------------------------------------------------------------------------
// fourth-order Hermite discretization

namespace {

double hermite_eval(const HermiteState& s, double r, int deriv)
{
    const int e = s.mesh.locate(r);
    const double a = s.mesh.left(e), h = s.mesh.right(e) - a;
    const auto b = hermite_cubic(std::clamp((r - a) / h, 0.0, 1.0), h);
    const Eigen::Vector4d c = s.coeffs.segment<4>(2 * e);
    if (deriv == 0) return b.value.dot(c);
    if (deriv == 1) return b.d1.dot(c) / h;
    return b.d2.dot(c) / (h * h);
}

class HermiteAssembly {
public:
    HermiteAssembly(const RadialProblem& p, const IntervalMesh& m) : prob_(p), mesh_(m), rule_(gauss_legendre(6)) {}

    int ndofs() const { return 2 * mesh_.num_nodes(); }
    int slope0() const { return 1; }
    int valueR() const { return ndofs() - 2; }

    // eps * (lap u, lap v) + ((f - det) , v) - eps * trace * R^{n-1} v_r(R); constrained rows hold u - data
    void build(const Eigen::VectorXd& u, double eps, double trace, Eigen::VectorXd& res, SparseMatrix* J) const
    {
        const int n = prob_.n, nd = ndofs();
        res = Eigen::VectorXd::Zero(nd);
        std::vector<Triplet> trips;
        for (int e = 0; e < mesh_.num_elements(); ++e) {
            const double a = mesh_.left(e), h = mesh_.right(e) - a;
            const Eigen::Vector4d c = u.segment<4>(2 * e);
            for (std::size_t q = 0; q < rule_.points.size(); ++q) {
                const double r = a + rule_.points[q] * h, wq = rule_.weights[q] * h * powi(r, n - 1);
                const auto b = hermite_cubic(rule_.points[q], h);
                const Eigen::Vector4d d1 = b.d1 / h, d2 = b.d2 / (h * h);
                const Eigen::Vector4d lapb = d2 + (n - 1) / r * d1;
                const double ur = d1.dot(c), urr = d2.dot(c), lapu = lapb.dot(c);
                const double qv = ur / r;
                const double det = urr * powi(qv, n - 1);
                const double f = prob_.f(r);
                Eigen::Vector4d ddet = d2 * powi(qv, n - 1);
                if (n > 1) ddet += urr * (n - 1) * powi(qv, n - 2) * d1 / r;
                for (int i = 0; i < 4; ++i) {
                    res(2 * e + i) += wq * (eps * lapu * lapb(i) + (f - det) * b.value(i));
                    if (!J) continue;
                    for (int j = 0; j < 4; ++j)
                        trips.push_back({2 * e + i, 2 * e + j, wq * (eps * lapb(j) * lapb(i) - ddet(j) * b.value(i))});
                }
            }
        }
        res(nd - 1) -= eps * trace * powi(mesh_.R, n - 1);
        res(slope0()) = u(slope0());
        res(valueR()) = u(valueR()) - prob_.gR;
        if (J) {
            std::erase_if(trips, [this](const Triplet& t) { return t.row == slope0() || t.row == valueR(); });
            trips.push_back({slope0(), slope0(), 1.0});
            trips.push_back({valueR(), valueR(), 1.0});
            *J = SparseMatrix::from_triplets(nd, nd, trips);
        }
    }

    // ||(f, v)|| over free rows, used as the residual scale
    double load_norm() const
    {
        const int n = prob_.n;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(ndofs());
        for (int e = 0; e < mesh_.num_elements(); ++e) {
            const double a = mesh_.left(e), h = mesh_.right(e) - a;
            for (std::size_t q = 0; q < rule_.points.size(); ++q) {
                const double r = a + rule_.points[q] * h, wq = rule_.weights[q] * h * powi(r, n - 1);
                const auto hb = hermite_cubic(rule_.points[q], h);
                b.segment<4>(2 * e) += wq * prob_.f(r) * hb.value;
            }
        }
        b(slope0()) = 0.0;
        b(valueR()) = 0.0;
        return b.norm();
    }

    // Delta_r u = s * n * f^{1/n}, u(R) = gR, u_r(0) = 0
    Eigen::VectorXd poisson_guess(double sign) const
    {
        const int n = prob_.n, nd = ndofs();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nd);
        std::vector<Triplet> trips;
        for (int e = 0; e < mesh_.num_elements(); ++e) {
            const double a = mesh_.left(e), h = mesh_.right(e) - a;
            for (std::size_t q = 0; q < rule_.points.size(); ++q) {
                const double r = a + rule_.points[q] * h, wq = rule_.weights[q] * h * powi(r, n - 1);
                const auto b = hermite_cubic(rule_.points[q], h);
                const Eigen::Vector4d d1 = b.d1 / h;
                const double s = sign * n * std::pow(std::max(prob_.f(r), 0.0), 1.0 / n);
                for (int i = 0; i < 4; ++i) {
                    rhs(2 * e + i) -= wq * s * b.value(i);
                    for (int j = 0; j < 4; ++j) trips.push_back({2 * e + i, 2 * e + j, wq * d1(i) * d1(j)});
                }
            }
        }
        std::erase_if(trips, [this](const Triplet& t) { return t.row == slope0() || t.row == valueR(); });
        trips.push_back({slope0(), slope0(), 1.0});
        trips.push_back({valueR(), valueR(), 1.0});
        rhs(slope0()) = 0.0;
        rhs(valueR()) = prob_.gR;
        return solve(SparseMatrix::from_triplets(nd, nd, trips), rhs).x;
    }

private:
    const RadialProblem& prob_;
    const IntervalMesh& mesh_;
    QuadratureRule1D rule_;
};

}  // namespace

double HermiteState::u(double r) const { return hermite_eval(*this, r, 0); }
double HermiteState::du(double r) const { return hermite_eval(*this, r, 1); }
double HermiteState::d2u(double r) const { return hermite_eval(*this, r, 2); }

RadialProfile HermiteState::profile() const
{
    auto self = std::make_shared<HermiteState>(*this);
    RadialProfile p;
    p.n = n;
    p.u = [self](double r) { return self->u(r); };
    p.du = [self](double r) { return self->du(r); };
    p.d2u = [self](double r) { return self->d2u(r); };
    return p;
}

HermiteState solve_radial_fourth_order(const RadialProblem& problem, const IntervalMesh& mesh,
                                       const RadialOptions& opts, const HermiteState* warm_start)
{
    problem.validate();
    if (opts.eps == 0.0) throw InvalidArgument("solve_radial_fourth_order: eps must be nonzero");
    if (opts.eps < 0.0 && problem.n % 2 != 0)
        throw InvalidArgument("solve_radial_fourth_order: negative eps needs even dimension");
    HermiteAssembly A(problem, mesh);
    const double sign = opts.eps > 0.0 ? 1.0 : -1.0;

    HermiteState st;
    st.mesh = mesh;
    st.n = problem.n;
    std::vector<double> stages;
    if (warm_start) {
        if (warm_start->coeffs.size() != A.ndofs())
            throw InvalidArgument("solve_radial_fourth_order: warm start on a different mesh");
        st.coeffs = warm_start->coeffs;
        stages.push_back(opts.eps);
    } else {
        st.coeffs = A.poisson_guess(sign);
        double e = std::abs(opts.eps) < opts.continuation_start ? opts.continuation_start : std::abs(opts.eps);
        while (e > std::abs(opts.eps) * (1.0 + 1e-12)) {
            stages.push_back(sign * e);
            e *= opts.continuation_ratio;
        }
        stages.push_back(opts.eps);
    }
    const double scale = A.load_norm();
    for (double e : stages) {
        const double trace = opts.boundary_laplacian ? *opts.boundary_laplacian : e;
        NonlinearSystem sys;
        sys.residual = [&A, e, trace](const Eigen::VectorXd& x) {
            Eigen::VectorXd r;
            A.build(x, e, trace, r, nullptr);
            return r;
        };
        sys.jacobian = [&A, e, trace](const Eigen::VectorXd& x) {
            Eigen::VectorXd r;
            SparseMatrix J;
            A.build(x, e, trace, r, &J);
            return J;
        };
        auto res = newton_solve(sys, st.coeffs, scale, {opts.tol, opts.max_newton, 8});
        st.coeffs = res.x;
        st.log.newton_residuals.insert(st.log.newton_residuals.end(), res.history.begin(), res.history.end());
        ++st.log.continuation_stages;
    }
    st.eps = opts.eps;
    return st;
}

RadialErrors radial_errors(const RadialProfile& uh, const RadialProfile& exact, const IntervalMesh& mesh,
                           int points_per_element)
{
    const auto rule = gauss_legendre(points_per_element);
    const int n = uh.n;
    RadialErrors E;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const double a = mesh.left(e), h = mesh.right(e) - a;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double r = a + rule.points[q] * h, w = rule.weights[q] * h * powi(r, n - 1);
            const double eu = uh.u(r) - exact.u(r), ed = uh.du(r) - exact.du(r), el = uh.lap(r) - exact.lap(r);
            E.L2 += w * eu * eu;
            E.H1 += w * ed * ed;
            E.lap_L2 += w * el * el;
            E.lap_max = std::max(E.lap_max, std::abs(el));
            E.Linf = std::max(E.Linf, std::abs(eu));
        }
    }
    E.L2 = std::sqrt(E.L2);
    E.H1 = std::sqrt(E.H1);
    E.lap_L2 = std::sqrt(E.lap_L2);
    return E;
}

ConvexityReport convexity_report(const RadialProfile& uh, const IntervalMesh& mesh, double eps, int points_per_element)
{
    const auto rule = gauss_legendre(points_per_element);
    ConvexityReport rep;
    rep.eps = eps;
    rep.min_laplacian = std::numeric_limits<double>::infinity();
    rep.min_second_derivative = std::numeric_limits<double>::infinity();
    double first_bad = std::numeric_limits<double>::infinity();
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const double a = mesh.left(e), h = mesh.right(e) - a;
        for (double t : rule.points) {
            const double r = a + t * h;
            const double d2 = uh.d2u(r);
            rep.min_laplacian = std::min(rep.min_laplacian, uh.lap(r));
            rep.min_second_derivative = std::min(rep.min_second_derivative, d2);
            if (d2 < 0.0) first_bad = std::min(first_bad, r);
        }
    }
    rep.nonconvex_band = std::isfinite(first_bad) ? mesh.R - first_bad : 0.0;
    return rep;
}

}  // namespace vmm
