#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vmm/basis.hpp"
#include "vmm/mesh.hpp"
#include "vmm/quadrature.hpp"
#include "vmm/sparse.hpp"

namespace vmm {

// Element-to-global index table.
struct DofMap {
    int num_dofs = 0;
    int dofs_per_element = 0;
    std::vector<int> table;  // num_elements * dofs_per_element

    int num_elements() const { return dofs_per_element ? static_cast<int>(table.size()) / dofs_per_element : 0; }
    std::span<const int> element(int e) const
    {
        return {table.data() + static_cast<std::size_t>(e) * dofs_per_element,
                static_cast<std::size_t>(dofs_per_element)};
    }
};

// Continuous P_k on a structured triangle mesh. Global dofs are the points of the
// k-times refined vertex lattice, numbered row by row.
class LagrangeSpace2D {
public:
    LagrangeSpace2D(std::shared_ptr<const TriangleMesh> mesh, int degree);

    const TriangleMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const TriangleMesh> mesh_ptr() const { return mesh_; }
    const LagrangeTriangle& basis() const { return basis_; }
    const DofMap& dofs() const { return dofs_; }
    int degree() const { return basis_.degree(); }
    int size() const { return dofs_.num_dofs; }
    const Eigen::Vector2d& coord(int d) const { return coords_[d]; }
    // Bitmask of BoundarySide flags; zero for interior dofs.
    unsigned boundary(int d) const { return boundary_[d]; }
    std::vector<int> boundary_dofs() const;

    // Affine map x = x0 + J xi of triangle t.
    Eigen::Vector2d to_physical(int t, const Eigen::Vector2d& xi) const;
    Eigen::Vector2d to_reference(int t, const Eigen::Vector2d& x) const;
    // Basis values with physical derivatives at reference point xi of triangle t.
    BasisValues2D eval(int t, const Eigen::Vector2d& xi) const;

    Eigen::VectorXd interpolate(const std::function<double(const Eigen::Vector2d&)>& f) const;

private:
    std::shared_ptr<const TriangleMesh> mesh_;
    LagrangeTriangle basis_;
    DofMap dofs_;
    std::vector<Eigen::Vector2d> coords_;
    std::vector<unsigned> boundary_;
};

// Finite element function on a LagrangeSpace2D.
struct Field2D {
    const LagrangeSpace2D* space = nullptr;
    Eigen::VectorXd coeffs;

    double value(const Eigen::Vector2d& x) const;
    Eigen::Vector2d grad(const Eigen::Vector2d& x) const;
    Eigen::Matrix2d hess(const Eigen::Vector2d& x) const;  // elementwise
};

// Pre-evaluated physical basis data at the quadrature points of one triangle.
struct ElementQuadrature {
    std::vector<Eigen::Vector2d> x;
    std::vector<double> w;  // includes |det J|
    std::vector<BasisValues2D> phi;
};

ElementQuadrature element_quadrature(const LagrangeSpace2D& V, int t, const QuadratureRule2D& rule);

using LocalMatrixKernel = std::function<Eigen::MatrixXd(int element)>;
using LocalVectorKernel = std::function<Eigen::VectorXd(int element)>;

// Sum element contributions; rows follow `test`, columns follow `trial`.
SparseMatrix assemble_matrix(const DofMap& test, const DofMap& trial, const LocalMatrixKernel& kernel);
Eigen::VectorXd assemble_vector(const DofMap& test, const LocalVectorKernel& kernel);

enum class Norm { L2, H1, H1Semi, H2Semi, LinfQuad };

struct ExactFunction2D {
    std::function<double(const Eigen::Vector2d&)> value;
    std::function<Eigen::Vector2d(const Eigen::Vector2d&)> grad;
    std::function<Eigen::Matrix2d(const Eigen::Vector2d&)> hess;
};

// Error of a finite element function against an exact solution. H2Semi is the
// broken (elementwise) seminorm and needs degree >= 2.
double error_norm(const Field2D& uh, const ExactFunction2D& exact, Norm norm, int quad_exactness);

}  // namespace vmm
