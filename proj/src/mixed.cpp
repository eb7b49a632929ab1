#include "vmm/mixed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "vmm/errors.hpp"

namespace vmm {

double default_tau(OperatorKind op) { return op == OperatorKind::InfinityLaplacian ? 1.0 : 0.0; }

MixedSpace::MixedSpace(std::shared_ptr<const TriangleMesh> mesh, int degree) : scalar_(std::move(mesh), degree)
{
    const int n = scalar_.size(), m = scalar_.dofs().dofs_per_element;
    block_.num_dofs = 4 * n;
    block_.dofs_per_element = 4 * m;
    const auto& sd = scalar_.dofs();
    block_.table.resize(static_cast<std::size_t>(sd.num_elements()) * 4 * m);
    for (int t = 0; t < sd.num_elements(); ++t) {
        auto e = sd.element(t);
        for (int c = 0; c < 4; ++c)
            for (int a = 0; a < m; ++a) block_.table[static_cast<std::size_t>(t) * 4 * m + c * m + a] = c * n + e[a];
    }
    free_index_.assign(4 * n, -1);
    for (int i = 0; i < 4 * n; ++i) {
        const int c = i / n, d = i % n;
        const unsigned f = scalar_.boundary(d);
        bool fixed = false;
        if (c == 0) fixed = f & (kLeft | kRight);
        if (c == 2) fixed = f & (kBottom | kTop);
        if (c == 3) fixed = f != 0;
        if (!fixed) {
            free_index_[i] = num_free_++;
            free_dofs_.push_back(i);
        }
    }
}

Eigen::VectorXd MixedSpace::gather(const Eigen::VectorXd& full) const
{
    Eigen::VectorXd y(num_free_);
    for (int k = 0; k < num_free_; ++k) y(k) = full(free_dofs_[k]);
    return y;
}

Eigen::VectorXd MixedSpace::scatter(const Eigen::VectorXd& free, Eigen::VectorXd full) const
{
    for (int k = 0; k < num_free_; ++k) full(free_dofs_[k]) = free(k);
    return full;
}

Field2D MixedState::u() const { return {&space->scalar(), x.segment(3 * space->scalar_size(), space->scalar_size())}; }

Field2D MixedState::shifted(int component) const
{
    if (component < 0 || component > 2) throw InvalidArgument("MixedState::shifted: component must be 0, 1 or 2");
    return {&space->scalar(), x.segment(component * space->scalar_size(), space->scalar_size())};
}

Eigen::Matrix2d MixedState::sigma(const Eigen::Vector2d& p) const
{
    const double s11 = shifted(0).value(p), s12 = shifted(1).value(p), s22 = shifted(2).value(p);
    const double uu = u().value(p);
    Eigen::Matrix2d S;
    S << s11 - tau * uu, s12, s12, s22 - tau * uu;
    return S;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::Vector2d tangential_data(const ProblemSpec& spec, const Eigen::Vector2d& x)
{
    if (spec.g_grad) return spec.g_grad(x);
    const double h = 1e-6;
    return {(spec.g(x + Eigen::Vector2d(h, 0)) - spec.g(x - Eigen::Vector2d(h, 0))) / (2 * h),
            (spec.g(x + Eigen::Vector2d(0, h)) - spec.g(x - Eigen::Vector2d(0, h))) / (2 * h)};
}

int resolve_exactness(int requested, int degree) { return requested > 0 ? requested : std::min(12, 2 * degree + 3); }

}  // namespace

MixedSystem::MixedSystem(const ProblemSpec& spec, const MixedSpace& space, double eps, double tau, int quad_exactness)
    : spec_(spec), space_(space), eps_(eps), tau_(tau), gamma_(0.0),
      rule_(triangle_quadrature(resolve_exactness(quad_exactness, space.degree())))
{
    spec.validate();
    if (eps == 0.0) throw InvalidArgument("MixedSystem: eps must be nonzero");
    if (tau < 0.0) throw InvalidArgument("MixedSystem: tau must be non-negative");
    if (spec.op == OperatorKind::InfinityLaplacian) gamma_ = spec.gamma_for(eps);
    const auto& V = space.scalar();
    const auto& mesh = V.mesh();
    for (int o = 0; o < 2 && o < mesh.num_triangles(); ++o)
        for (const auto& xi : rule_.points) phi_[o].push_back(V.eval(o, xi));
    detJ_ = std::abs(mesh.jacobian(0).determinant());
    source_.resize(static_cast<std::size_t>(mesh.num_triangles()) * rule_.points.size());
    for (int t = 0; t < mesh.num_triangles(); ++t)
        for (std::size_t q = 0; q < rule_.points.size(); ++q)
            source_[t * rule_.points.size() + q] = spec.source_at(V.to_physical(t, rule_.points[q]), eps);

    // G(kappa) = int_{boundary} (kappa nu . t) dg/dt
    boundary_load_ = Eigen::VectorXd::Zero(space.size());
    const auto r1 = interval_quadrature(resolve_exactness(quad_exactness, space.degree()));
    const int n = space.scalar_size();
    for (const auto& e : mesh.boundary_edges) {
        const Eigen::Vector2d a = mesh.vertices[e.v[0]], b = mesh.vertices[e.v[1]];
        const double len = (b - a).norm();
        const auto dofs = V.dofs().element(e.triangle);
        const Eigen::Vector2d nu = e.normal, tg = e.tangent;
        const double c11 = nu(0) * tg(0), c12 = nu(0) * tg(1) + nu(1) * tg(0), c22 = nu(1) * tg(1);
        for (std::size_t q = 0; q < r1.points.size(); ++q) {
            const Eigen::Vector2d x = a + r1.points[q] * (b - a);
            const double w = r1.weights[q] * len * tangential_data(spec, x).dot(tg);
            const auto v = V.basis().eval(V.to_reference(e.triangle, x));
            for (std::size_t k = 0; k < dofs.size(); ++k) {
                boundary_load_(dofs[k]) += w * c11 * v.value(k);
                boundary_load_(n + dofs[k]) += w * c12 * v.value(k);
                boundary_load_(2 * n + dofs[k]) += w * c22 * v.value(k);
            }
        }
    }
}

void MixedSystem::apply_constraints(Eigen::VectorXd& full) const
{
    const auto& V = space_.scalar();
    const int n = V.size();
    if (full.size() != 4 * n) throw InvalidArgument("apply_constraints: wrong vector length");
    for (int d = 0; d < n; ++d) {
        const unsigned f = V.boundary(d);
        if (!f) continue;
        const Eigen::Vector2d& x = V.coord(d);
        const double g = spec_.g(x);
        full(3 * n + d) = g;
        if (f & (kLeft | kRight)) {
            Eigen::Vector2d nu((f & kLeft) ? -1.0 : 1.0, 0.0);
            full(d) = spec_.second_trace_at(x, nu, eps_) + tau_ * g;
        }
        if (f & (kBottom | kTop)) {
            Eigen::Vector2d nu(0.0, (f & kBottom) ? -1.0 : 1.0);
            full(2 * n + d) = spec_.second_trace_at(x, nu, eps_) + tau_ * g;
        }
    }
}

void MixedSystem::element(const Eigen::VectorXd& full, int t, Eigen::VectorXd& r, Eigen::MatrixXd* K) const
{
    const auto& V = space_.scalar();
    const int m = V.basis().size(), n = V.size();
    const auto dofs = V.dofs().element(t);
    Eigen::VectorXd c11(m), c12(m), c22(m), cu(m);
    for (int a = 0; a < m; ++a) {
        c11(a) = full(dofs[a]);
        c12(a) = full(n + dofs[a]);
        c22(a) = full(2 * n + dofs[a]);
        cu(a) = full(3 * n + dofs[a]);
    }
    r = Eigen::VectorXd::Zero(4 * m);
    if (K) *K = Eigen::MatrixXd::Zero(4 * m, 4 * m);
    const auto& phis = phi_[t % 2];
    const double eps = eps_, tau = tau_;
    for (std::size_t q = 0; q < rule_.points.size(); ++q) {
        const double w = rule_.weights[q] * detJ_;
        const Eigen::VectorXd& p = phis[q].value;
        const Eigen::MatrixX2d& G = phis[q].grad;
        const double s11 = p.dot(c11), s12 = p.dot(c12), s22 = p.dot(c22), uu = p.dot(cu);
        const Eigen::Vector2d g11 = G.transpose() * c11, g12 = G.transpose() * c12, g22 = G.transpose() * c22;
        const Eigen::Vector2d gu = G.transpose() * cu;
        Eigen::Matrix2d kap;
        kap << s11 - tau * uu, s12, s12, s22 - tau * uu;
        const double src = source_[t * rule_.points.size() + q];
        const double F = operator_core<double>(spec_.op, kap, gu, src, spec_.K, gamma_);
        const Eigen::Vector2d divs(g11(0) + g12(1), g12(0) + g22(1));
        const double trs = s11 + s22;

        const Eigen::VectorXd Gx = G.col(0), Gy = G.col(1);
        r.segment(0, m) += w * (s11 * p + gu(0) * Gx - tau * uu * p);
        r.segment(m, m) += w * (2.0 * s12 * p + gu(0) * Gy + gu(1) * Gx);
        r.segment(2 * m, m) += w * (s22 * p + gu(1) * Gy - tau * uu * p);
        r.segment(3 * m, m) += w * (eps * (G * divs - tau * trs * p) - 2.0 * eps * tau * (G * gu) +
                                     2.0 * eps * tau * tau * uu * p - F * p);
        if (!K) continue;

        const LinearizationBlocks L = eval_Fprime(spec_, kap, gu, uu, V.to_physical(t, rule_.points[q]), eps);
        const Eigen::MatrixXd PP = w * p * p.transpose();
        const Eigen::MatrixXd XX = w * Gx * Gx.transpose(), YY = w * Gy * Gy.transpose();
        const Eigen::MatrixXd XY = w * Gx * Gy.transpose();  // (a, b) -> Gx_a Gy_b
        auto& k = *K;
        k.block(0, 0, m, m) += PP;
        k.block(m, m, m, m) += 2.0 * PP;
        k.block(2 * m, 2 * m, m, m) += PP;
        // W rows against u columns: b(kappa_a, phi_b)
        k.block(0, 3 * m, m, m) += XX - tau * PP;
        k.block(m, 3 * m, m, m) += XY.transpose() + XY;  // Gy_a Gx_b + Gx_a Gy_b
        k.block(2 * m, 3 * m, m, m) += YY - tau * PP;
        // Q rows against s columns
        k.block(3 * m, 0, m, m) += eps * (XX - tau * PP) - L.F_r(0, 0) * PP;
        k.block(3 * m, m, m, m) += eps * (XY + XY.transpose()) - (L.F_r(0, 1) + L.F_r(1, 0)) * PP;
        k.block(3 * m, 2 * m, m, m) += eps * (YY - tau * PP) - L.F_r(1, 1) * PP;
        // Q rows against u columns
        const double Fz = L.F_z - tau * L.F_r.trace();
        const Eigen::VectorXd Gp = G * L.F_p;  // F_p . grad phi_b
        k.block(3 * m, 3 * m, m, m) +=
            -2.0 * eps * tau * (XX + YY) + 2.0 * eps * tau * tau * PP - w * p * Gp.transpose() - Fz * PP;
    }
}

Eigen::VectorXd MixedSystem::residual(const Eigen::VectorXd& full) const
{
    Eigen::VectorXd R = -boundary_load_;
    const auto& bd = space_.dofs();
    Eigen::VectorXd r;
    for (int t = 0; t < bd.num_elements(); ++t) {
        element(full, t, r, nullptr);
        const auto idx = bd.element(t);
        for (std::size_t a = 0; a < idx.size(); ++a) R(idx[a]) += r(a);
    }
    return space_.gather(R);
}

SparseMatrix MixedSystem::jacobian(const Eigen::VectorXd& full) const
{
    const auto& bd = space_.dofs();
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(bd.num_elements()) * bd.dofs_per_element * bd.dofs_per_element);
    Eigen::VectorXd r;
    Eigen::MatrixXd K;
    for (int t = 0; t < bd.num_elements(); ++t) {
        element(full, t, r, &K);
        const auto idx = bd.element(t);
        for (std::size_t a = 0; a < idx.size(); ++a) {
            const int fa = space_.free_index(idx[a]);
            if (fa < 0) continue;
            for (std::size_t b = 0; b < idx.size(); ++b) {
                const int fb = space_.free_index(idx[b]);
                if (fb >= 0 && K(a, b) != 0.0) trips.push_back({fa, fb, K(a, b)});
            }
        }
    }
    return SparseMatrix::from_triplets(space_.num_free(), space_.num_free(), trips);
}

double MixedSystem::data_scale() const
{
    Eigen::VectorXd x = Eigen::VectorXd::Zero(space_.size());
    apply_constraints(x);
    const double s = residual(x).norm();
    return s > 0.0 ? s : 1.0;
}

// ---------------------------------------------------------------------------

MixedState newton_solve(const ProblemSpec& spec, const MixedState& start, const MixedOptions& opts)
{
    if (!start.space) throw InvalidArgument("newton_solve: state has no space");
    const MixedSpace& space = *start.space;
    MixedSystem sys(spec, space, start.eps, start.tau, opts.quad_exactness);
    Eigen::VectorXd base = start.x;
    sys.apply_constraints(base);
    NonlinearSystem ns;
    ns.residual = [&](const Eigen::VectorXd& y) { return sys.residual(space.scatter(y, base)); };
    ns.jacobian = [&](const Eigen::VectorXd& y) { return sys.jacobian(space.scatter(y, base)); };
    auto res = vmm::newton_solve(ns, space.gather(base), sys.data_scale(),
                                 {opts.tol, opts.max_newton, opts.max_halvings});
    MixedState out = start;
    out.x = space.scatter(res.x, base);
    out.newton_history = res.history;
    out.newton_iterations = res.iterations;
    return out;
}

MixedState initial_guess(const ProblemSpec& spec, const MixedSpace& space, double eps, const MixedOptions& opts)
{
    spec.validate();
    const auto& V = space.scalar();
    const int n = V.size(), m = V.basis().size();
    const double tau = opts.tau ? *opts.tau : default_tau(spec.op);
    const double sign = eps > 0.0 ? 1.0 : -1.0;
    const auto rule = triangle_quadrature(resolve_exactness(opts.quad_exactness, space.degree()));

    // -Delta u0 = -s with u0 = g, s = 2 sqrt(max(f, 0)) (zero for the infinity-Laplacian)
    std::vector<int> idx(n, -1);
    int ni = 0;
    for (int d = 0; d < n; ++d)
        if (!V.boundary(d)) idx[d] = ni++;
    Eigen::VectorXd gvals(n);
    for (int d = 0; d < n; ++d) gvals(d) = V.boundary(d) ? spec.g(V.coord(d)) : 0.0;
    std::vector<Triplet> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ni);
    for (int t = 0; t < V.mesh().num_triangles(); ++t) {
        const auto eq = element_quadrature(V, t, rule);
        const auto dofs = V.dofs().element(t);
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
        for (std::size_t q = 0; q < eq.x.size(); ++q) {
            A += eq.w[q] * eq.phi[q].grad * eq.phi[q].grad.transpose();
            double s = 0.0;
            if (spec.op != OperatorKind::InfinityLaplacian) {
                double f = spec.source_at(eq.x[q], eps);
                if (spec.op == OperatorKind::GaussCurvature) f *= spec.K;
                s = sign * 2.0 * std::sqrt(std::max(f, 0.0));
            }
            b -= eq.w[q] * s * eq.phi[q].value;
        }
        for (int a = 0; a < m; ++a) {
            if (idx[dofs[a]] < 0) continue;
            rhs(idx[dofs[a]]) += b(a);
            for (int c = 0; c < m; ++c) {
                if (idx[dofs[c]] >= 0)
                    trips.push_back({idx[dofs[a]], idx[dofs[c]], A(a, c)});
                else
                    rhs(idx[dofs[a]]) -= A(a, c) * gvals(dofs[c]);
            }
        }
    }
    Eigen::VectorXd u0 = gvals;
    if (ni > 0) {
        const Eigen::VectorXd ui = solve(SparseMatrix::from_triplets(ni, ni, trips), rhs).x;
        for (int d = 0; d < n; ++d)
            if (idx[d] >= 0) u0(d) = ui(idx[d]);
    }

    MixedState st;
    st.space = &space;
    st.eps = eps;
    st.tau = tau;
    st.x = Eigen::VectorXd::Zero(space.size());
    st.x.segment(3 * n, n) = u0;
    MixedSystem sys(spec, space, eps, tau, opts.quad_exactness);
    sys.apply_constraints(st.x);

    // first mixed equation with u fixed: mass solve for the free shifted-Hessian dofs
    const int nw = static_cast<int>(std::count_if(space.free_dofs().begin(), space.free_dofs().end(),
                                                  [n](int i) { return i < 3 * n; }));
    if (nw > 0) {
        const SparseMatrix J = sys.jacobian(st.x);
        std::vector<Triplet> mt;
        const auto& off = J.row_offsets();
        for (int r = 0; r < nw; ++r)
            for (long k = off[r]; k < off[r + 1]; ++k)
                if (J.column_indices()[k] < nw) mt.push_back({r, J.column_indices()[k], J.values()[k]});
        const Eigen::VectorXd R = sys.residual(st.x).head(nw);
        const Eigen::VectorXd ds = solve(SparseMatrix::from_triplets(nw, nw, mt), -R).x;
        for (int k = 0; k < nw; ++k) st.x(space.free_dofs()[k]) += ds(k);
    }
    return st;
}

ContinuationResult continuation_solve(const ProblemSpec& spec, const MixedSpace& space, double eps_target,
                                      double eps_start, const ContinuationSchedule& schedule,
                                      const MixedOptions& opts, const MixedState* warm_start)
{
    if (eps_target == 0.0 || eps_start == 0.0 || (eps_target > 0) != (eps_start > 0))
        throw InvalidArgument("continuation_solve: eps values must be nonzero with equal sign");
    if (!(schedule.ratio > 0.0 && schedule.ratio <= 1.0))
        throw InvalidArgument("continuation_solve: ratio must lie in (0, 1]");
    std::vector<double> eps_list;
    if (schedule.ratio == 1.0) {
        eps_list.assign(std::max(1, schedule.repeats), eps_target);
    } else {
        double e = std::abs(eps_start) >= std::abs(eps_target) ? eps_start : eps_target;
        while (std::abs(e) > std::abs(eps_target) * (1.0 + 1e-12) &&
               static_cast<int>(eps_list.size()) < schedule.max_stages - 1) {
            eps_list.push_back(e);
            e *= schedule.ratio;
        }
        eps_list.push_back(eps_target);
    }
    const double tau = opts.tau ? *opts.tau : default_tau(spec.op);
    ContinuationResult out;
    MixedState st;
    if (warm_start) {
        if (warm_start->space != &space) throw InvalidArgument("continuation_solve: warm start on another space");
        st = *warm_start;
        st.tau = tau;
    } else {
        st = initial_guess(spec, space, eps_list.front(), opts);
    }
    for (double e : eps_list) {
        st.eps = e;
        st = newton_solve(spec, st, opts);
        out.stages.push_back({e, st.newton_iterations});
    }
    out.state = std::move(st);
    return out;
}

MixedState transfer(const MixedState& from, const MixedSpace& to)
{
    if (!from.space) throw InvalidArgument("transfer: state has no space");
    MixedState st;
    st.space = &to;
    st.eps = from.eps;
    st.tau = from.tau;
    const int n = to.scalar_size();
    st.x.resize(to.size());
    Field2D f[4] = {from.shifted(0), from.shifted(1), from.shifted(2), from.u()};
    for (int d = 0; d < n; ++d)
        for (int c = 0; c < 4; ++c) st.x(c * n + d) = f[c].value(to.scalar().coord(d));
    return st;
}

MixedErrors mixed_errors(const MixedState& state, const ExactSolution& exact, int quad_exactness)
{
    const auto& V = state.space->scalar();
    const int n = V.size();
    const auto rule = triangle_quadrature(std::max(resolve_exactness(quad_exactness, V.degree()), 2 * V.degree() + 2));
    MixedErrors E;
    for (int t = 0; t < V.mesh().num_triangles(); ++t) {
        const auto eq = element_quadrature(V, t, rule);
        const auto dofs = V.dofs().element(t);
        const int m = static_cast<int>(dofs.size());
        Eigen::MatrixXd c(m, 4);
        for (int a = 0; a < m; ++a)
            for (int k = 0; k < 4; ++k) c(a, k) = state.x(k * n + dofs[a]);
        for (std::size_t q = 0; q < eq.x.size(); ++q) {
            const Eigen::Vector4d v = c.transpose() * eq.phi[q].value;
            const Eigen::Vector2d gu = eq.phi[q].grad.transpose() * c.col(3);
            const double eu = exact.u(eq.x[q]) - v(3);
            E.L2 += eq.w[q] * eu * eu;
            E.Linf = std::max(E.Linf, std::abs(eu));
            if (exact.grad) E.H1 += eq.w[q] * (exact.grad(eq.x[q]) - gu).squaredNorm();
            if (exact.hess) {
                const Eigen::Matrix2d H = exact.hess(eq.x[q]);
                const double d11 = H(0, 0) - (v(0) - state.tau * v(3)), d12 = H(0, 1) - v(1),
                             d22 = H(1, 1) - (v(2) - state.tau * v(3));
                E.sigma_L2 += eq.w[q] * (d11 * d11 + 2.0 * d12 * d12 + d22 * d22);
            }
        }
    }
    E.H1 = std::sqrt(E.L2 + E.H1);
    E.L2 = std::sqrt(E.L2);
    E.sigma_L2 = std::sqrt(E.sigma_L2);
    return E;
}

// ---------------------------------------------------------------------------

InfSupProbe infsup_probe(std::shared_ptr<const TriangleMesh> mesh, int degree, double tau, int trials, unsigned seed)
{
    MixedSpace space(std::move(mesh), degree);
    const auto& V = space.scalar();
    const int n = V.size(), m = V.basis().size();
    const auto rule = triangle_quadrature(2 * degree + 1);
    // index maps: shifted-Hessian free dofs and interior u dofs
    std::vector<int> wi(3 * n, -1), qi(n, -1);
    int nw = 0, nq = 0;
    for (int i = 0; i < 3 * n; ++i)
        if (!space.constrained(i)) wi[i] = nw++;
    for (int d = 0; d < n; ++d)
        if (!V.boundary(d)) qi[d] = nq++;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nw, nq), Mw = Eigen::MatrixXd::Zero(nw, nw),
                    Mq = Eigen::MatrixXd::Zero(nq, nq);
    for (int t = 0; t < V.mesh().num_triangles(); ++t) {
        const auto eq = element_quadrature(V, t, rule);
        const auto dofs = V.dofs().element(t);
        for (std::size_t q = 0; q < eq.x.size(); ++q) {
            const auto& p = eq.phi[q].value;
            const auto& G = eq.phi[q].grad;
            const double w = eq.w[q];
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) {
                    const double h1 = w * (p(a) * p(b) + G.row(a).dot(G.row(b)));
                    const int qa = qi[dofs[a]], qb = qi[dofs[b]];
                    if (qa >= 0 && qb >= 0) Mq(qa, qb) += h1;
                    for (int c = 0; c < 3; ++c) {
                        const int ia = wi[c * n + dofs[a]], ib = wi[c * n + dofs[b]];
                        if (ia >= 0 && ib >= 0) Mw(ia, ib) += (c == 1 ? 2.0 : 1.0) * h1;
                    }
                    if (qb < 0) continue;
                    // b(kappa_a, phi_b) = (div kappa_a, grad phi_b) - tau (tr kappa_a, phi_b)
                    const double bxx = w * G(a, 0) * G(b, 0), byy = w * G(a, 1) * G(b, 1);
                    const double bxy = w * (G(a, 1) * G(b, 0) + G(a, 0) * G(b, 1)), pp = w * p(a) * p(b);
                    if (wi[dofs[a]] >= 0) B(wi[dofs[a]], qb) += bxx - tau * pp;
                    if (wi[n + dofs[a]] >= 0) B(wi[n + dofs[a]], qb) += bxy;
                    if (wi[2 * n + dofs[a]] >= 0) B(wi[2 * n + dofs[a]], qb) += byy - tau * pp;
                }
        }
    }
    InfSupProbe out;
    if (nq == 0) return out;
    const Eigen::MatrixXd S = B.transpose() * Mw.llt().solve(B);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(S, Mq);
    out.eigen_beta = std::sqrt(std::max(0.0, ges.eigenvalues().minCoeff()));

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    out.candidate_ratio = std::numeric_limits<double>::infinity();
    for (int k = 0; k < trials; ++k) {
        Eigen::VectorXd w(nq);
        for (int i = 0; i < nq; ++i) w(i) = U(rng);
        // mu = I w on the free shifted-Hessian dofs
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(nw);
        for (int d = 0; d < n; ++d) {
            if (qi[d] < 0) continue;
            if (wi[d] >= 0) mu(wi[d]) = w(qi[d]);
            if (wi[2 * n + d] >= 0) mu(wi[2 * n + d]) = w(qi[d]);
        }
        const double ratio = mu.dot(B * w) / (std::sqrt(mu.dot(Mw * mu)) * std::sqrt(w.dot(Mq * w)));
        out.candidate_ratio = std::min(out.candidate_ratio, ratio);
    }
    return out;
}

// ---------------------------------------------------------------------------

void write_checkpoint(const MixedState& state, std::ostream& os)
{
    if (!state.space) throw InvalidArgument("write_checkpoint: state has no space");
    const auto& m = state.space->mesh();
    os << "VMM1\n" << std::setprecision(17);
    os << "box " << m.box.x0 << ' ' << m.box.x1 << ' ' << m.box.y0 << ' ' << m.box.y1 << '\n';
    os << "grid " << m.nx << ' ' << m.ny << '\n';
    os << "degree " << state.space->degree() << '\n';
    os << "eps " << state.eps << '\n';
    os << "tau " << state.tau << '\n';
    os << "size " << state.x.size() << '\n';
    for (int i = 0; i < state.x.size(); ++i) os << state.x(i) << '\n';
    if (!os) throw IoError("write_checkpoint: stream error");
}

void write_checkpoint(const MixedState& state, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw IoError("write_checkpoint: cannot open " + path);
    write_checkpoint(state, os);
}

MixedState read_checkpoint(const MixedSpace& space, std::istream& is)
{
    std::string magic, key;
    if (!(is >> magic) || magic != "VMM1") throw IoError("read_checkpoint: bad magic");
    double x0, x1, y0, y1;
    int nx, ny, k;
    long size;
    MixedState st;
    auto expect = [&](const char* name) {
        if (!(is >> key) || key != name) throw IoError(std::string("read_checkpoint: expected ") + name);
    };
    expect("box");
    is >> x0 >> x1 >> y0 >> y1;
    expect("grid");
    is >> nx >> ny;
    expect("degree");
    is >> k;
    expect("eps");
    is >> st.eps;
    expect("tau");
    is >> st.tau;
    expect("size");
    is >> size;
    if (!is) throw IoError("read_checkpoint: truncated header");
    const auto& m = space.mesh();
    const double tol = 1e-12;
    if (nx != m.nx || ny != m.ny || k != space.degree() || size != space.size() || std::abs(x0 - m.box.x0) > tol ||
        std::abs(x1 - m.box.x1) > tol || std::abs(y0 - m.box.y0) > tol || std::abs(y1 - m.box.y1) > tol)
        throw InvalidArgument("read_checkpoint: checkpoint does not match the space");
    st.space = &space;
    st.x.resize(size);
    for (long i = 0; i < size; ++i)
        if (!(is >> st.x(i))) throw IoError("read_checkpoint: truncated data");
    return st;
}

MixedState read_checkpoint(const MixedSpace& space, const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw IoError("read_checkpoint: cannot open " + path);
    return read_checkpoint(space, is);
}

}  // namespace vmm
