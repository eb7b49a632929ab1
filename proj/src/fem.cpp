#include "vmm/fem.hpp"

#include <algorithm>
#include <cmath>

#include "vmm/errors.hpp"

namespace vmm {

LagrangeSpace2D::LagrangeSpace2D(std::shared_ptr<const TriangleMesh> mesh, int degree)
    : mesh_(std::move(mesh)), basis_(degree)
{
    if (!mesh_) throw InvalidArgument("LagrangeSpace2D: null mesh");
    const auto& m = *mesh_;
    const int k = degree, Lx = k * m.nx + 1, Ly = k * m.ny + 1;
    dofs_.num_dofs = Lx * Ly;
    dofs_.dofs_per_element = basis_.size();
    dofs_.table.resize(static_cast<std::size_t>(m.num_triangles()) * basis_.size());
    for (int t = 0; t < m.num_triangles(); ++t) {
        const int cell = t / 2, i = cell % m.nx, j = cell / m.nx;
        const bool upper = t % 2 == 1;
        for (int b = 0; b < basis_.size(); ++b) {
            const auto& ab = basis_.lattice()[b];
            int I, J;
            if (!upper) {
                I = k * i + ab.x() + ab.y();
                J = k * j + ab.y();
            } else {
                I = k * i + ab.x();
                J = k * j + ab.x() + ab.y();
            }
            dofs_.table[static_cast<std::size_t>(t) * basis_.size() + b] = J * Lx + I;
        }
    }
    coords_.resize(dofs_.num_dofs);
    boundary_.assign(dofs_.num_dofs, 0u);
    const auto& box = m.box;
    for (int J = 0; J < Ly; ++J)
        for (int I = 0; I < Lx; ++I) {
            const int d = J * Lx + I;
            double x = I == Lx - 1 ? box.x1 : box.x0 + (box.x1 - box.x0) * I / (Lx - 1);
            double y = J == Ly - 1 ? box.y1 : box.y0 + (box.y1 - box.y0) * J / (Ly - 1);
            coords_[d] = {x, y};
            unsigned f = 0;
            if (I == 0) f |= kLeft;
            if (I == Lx - 1) f |= kRight;
            if (J == 0) f |= kBottom;
            if (J == Ly - 1) f |= kTop;
            boundary_[d] = f;
        }
}

std::vector<int> LagrangeSpace2D::boundary_dofs() const
{
    std::vector<int> out;
    for (int d = 0; d < size(); ++d)
        if (boundary_[d]) out.push_back(d);
    return out;
}

Eigen::Vector2d LagrangeSpace2D::to_physical(int t, const Eigen::Vector2d& xi) const
{
    return mesh_->vertices[mesh_->triangles[t][0]] + mesh_->jacobian(t) * xi;
}

Eigen::Vector2d LagrangeSpace2D::to_reference(int t, const Eigen::Vector2d& x) const
{
    Eigen::Vector2d xi = mesh_->jacobian(t).inverse() * (x - mesh_->vertices[mesh_->triangles[t][0]]);
    // snap round-off so points on element boundaries stay inside
    xi = xi.cwiseMax(0.0);
    const double s = xi.sum();
    if (s > 1.0) xi /= s;
    return xi;
}

BasisValues2D LagrangeSpace2D::eval(int t, const Eigen::Vector2d& xi) const
{
    BasisValues2D v = basis_.eval(xi);
    push_forward(v, mesh_->jacobian(t));
    return v;
}

Eigen::VectorXd LagrangeSpace2D::interpolate(const std::function<double(const Eigen::Vector2d&)>& f) const
{
    Eigen::VectorXd c(size());
    for (int d = 0; d < size(); ++d) c(d) = f(coords_[d]);
    return c;
}

namespace {

template <class F>
auto field_eval(const Field2D& u, const Eigen::Vector2d& x, F&& f)
{
    if (!u.space) throw InvalidArgument("Field2D: no space attached");
    const auto& V = *u.space;
    const int t = V.mesh().locate(x);
    const auto v = V.eval(t, V.to_reference(t, x));
    const auto dofs = V.dofs().element(t);
    Eigen::VectorXd local(dofs.size());
    for (std::size_t b = 0; b < dofs.size(); ++b) local(b) = u.coeffs(dofs[b]);
    return f(v, local);
}

}  // namespace

double Field2D::value(const Eigen::Vector2d& x) const
{
    return field_eval(*this, x, [](const BasisValues2D& v, const Eigen::VectorXd& c) { return v.value.dot(c); });
}

Eigen::Vector2d Field2D::grad(const Eigen::Vector2d& x) const
{
    return field_eval(*this, x, [](const BasisValues2D& v, const Eigen::VectorXd& c) -> Eigen::Vector2d {
        return v.grad.transpose() * c;
    });
}

Eigen::Matrix2d Field2D::hess(const Eigen::Vector2d& x) const
{
    return field_eval(*this, x, [](const BasisValues2D& v, const Eigen::VectorXd& c) -> Eigen::Matrix2d {
        Eigen::Vector3d h = v.hess.transpose() * c;
        Eigen::Matrix2d H;
        H << h(0), h(1), h(1), h(2);
        return H;
    });
}

ElementQuadrature element_quadrature(const LagrangeSpace2D& V, int t, const QuadratureRule2D& rule)
{
    ElementQuadrature eq;
    const double detJ = std::abs(V.mesh().jacobian(t).determinant());
    const std::size_t nq = rule.points.size();
    eq.x.reserve(nq);
    eq.w.reserve(nq);
    eq.phi.reserve(nq);
    for (std::size_t q = 0; q < nq; ++q) {
        eq.x.push_back(V.to_physical(t, rule.points[q]));
        eq.w.push_back(rule.weights[q] * detJ);
        eq.phi.push_back(V.eval(t, rule.points[q]));
    }
    return eq;
}

SparseMatrix assemble_matrix(const DofMap& test, const DofMap& trial, const LocalMatrixKernel& kernel)
{
    if (test.num_elements() != trial.num_elements())
        throw InvalidArgument("assemble_matrix: dof maps cover different element counts");
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(test.num_elements()) * test.dofs_per_element * trial.dofs_per_element);
    for (int e = 0; e < test.num_elements(); ++e) {
        const Eigen::MatrixXd K = kernel(e);
        const auto rows = test.element(e), cols = trial.element(e);
        if (K.rows() != static_cast<long>(rows.size()) || K.cols() != static_cast<long>(cols.size()))
            throw InternalError("assemble_matrix: local matrix has wrong shape");
        for (std::size_t a = 0; a < rows.size(); ++a)
            for (std::size_t b = 0; b < cols.size(); ++b)
                if (K(a, b) != 0.0) trips.push_back({rows[a], cols[b], K(a, b)});
    }
    return SparseMatrix::from_triplets(test.num_dofs, trial.num_dofs, trips);
}

Eigen::VectorXd assemble_vector(const DofMap& test, const LocalVectorKernel& kernel)
{
    Eigen::VectorXd F = Eigen::VectorXd::Zero(test.num_dofs);
    for (int e = 0; e < test.num_elements(); ++e) {
        const Eigen::VectorXd f = kernel(e);
        const auto rows = test.element(e);
        if (f.size() != static_cast<long>(rows.size())) throw InternalError("assemble_vector: wrong local size");
        for (std::size_t a = 0; a < rows.size(); ++a) F(rows[a]) += f(a);
    }
    return F;
}

double error_norm(const Field2D& uh, const ExactFunction2D& exact, Norm norm, int quad_exactness)
{
    if (!uh.space) throw InvalidArgument("error_norm: field has no space");
    const auto& V = *uh.space;
    if (norm == Norm::H2Semi && V.degree() < 2)
        throw InvalidArgument("error_norm: H2 seminorm of a piecewise-linear field is not defined");
    if ((norm == Norm::H1 || norm == Norm::H1Semi) && !exact.grad)
        throw InvalidArgument("error_norm: exact gradient required");
    if (norm == Norm::H2Semi && !exact.hess) throw InvalidArgument("error_norm: exact Hessian required");
    const auto rule = triangle_quadrature(quad_exactness);
    double acc = 0.0;
    for (int t = 0; t < V.mesh().num_triangles(); ++t) {
        const auto eq = element_quadrature(V, t, rule);
        const auto dofs = V.dofs().element(t);
        Eigen::VectorXd c(dofs.size());
        for (std::size_t b = 0; b < dofs.size(); ++b) c(b) = uh.coeffs(dofs[b]);
        for (std::size_t q = 0; q < eq.x.size(); ++q) {
            const auto& phi = eq.phi[q];
            const auto& x = eq.x[q];
            switch (norm) {
            case Norm::L2:
            case Norm::H1:
            case Norm::LinfQuad: {
                const double e = exact.value(x) - phi.value.dot(c);
                if (norm == Norm::LinfQuad)
                    acc = std::max(acc, std::abs(e));
                else
                    acc += eq.w[q] * e * e;
                if (norm == Norm::H1)
                    acc += eq.w[q] * (exact.grad(x) - phi.grad.transpose() * c).squaredNorm();
                break;
            }
            case Norm::H1Semi:
                acc += eq.w[q] * (exact.grad(x) - phi.grad.transpose() * c).squaredNorm();
                break;
            case Norm::H2Semi: {
                const Eigen::Vector3d h = phi.hess.transpose() * c;
                const Eigen::Matrix2d H = exact.hess(x);
                acc += eq.w[q] * ((H(0, 0) - h(0)) * (H(0, 0) - h(0)) + 2.0 * (H(0, 1) - h(1)) * (H(0, 1) - h(1)) +
                                  (H(1, 1) - h(2)) * (H(1, 1) - h(2)));
                break;
            }
            }
        }
    }
    return norm == Norm::LinfQuad ? acc : std::sqrt(acc);
}

}  // namespace vmm
