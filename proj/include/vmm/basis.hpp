#pragma once

#include <vector>

#include <Eigen/Dense>

namespace vmm {

struct BasisValues2D {
    Eigen::VectorXd value;      // one entry per local basis function
    Eigen::MatrixX2d grad;      // rows: d/dx, d/dy
    Eigen::MatrixX3d hess;      // rows: d2/dx2, d2/dxdy, d2/dy2
};

// Lagrange P_k on the reference triangle (0,0),(1,0),(0,1), degree 1..3.
// Nodes are the lattice points (i/k, j/k) with i + j <= k, ordered by j then i.
class LagrangeTriangle {
public:
    explicit LagrangeTriangle(int degree);

    int degree() const { return degree_; }
    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<Eigen::Vector2i>& lattice() const { return lattice_; }
    const std::vector<Eigen::Vector2d>& nodes() const { return nodes_; }

    // Values and derivatives with respect to reference coordinates.
    BasisValues2D eval(const Eigen::Vector2d& xi) const;

private:
    int degree_;
    std::vector<Eigen::Vector2i> lattice_;
    std::vector<Eigen::Vector2d> nodes_;
    std::vector<Eigen::Vector2i> monomials_;
    Eigen::MatrixXd coeff_;  // column b holds monomial coefficients of basis b
};

// Map reference derivatives to an affine physical triangle with x = x0 + J xi.
void push_forward(BasisValues2D& v, const Eigen::Matrix2d& J);

struct BasisValues1D {
    Eigen::VectorXd value, d1, d2;
};

// Lagrange P_k on [0, 1], nodes equispaced and ordered left to right.
class LagrangeInterval {
public:
    explicit LagrangeInterval(int degree);
    int degree() const { return degree_; }
    int size() const { return degree_ + 1; }
    BasisValues1D eval(double xi) const;

private:
    int degree_;
    Eigen::MatrixXd coeff_;
};

// Cubic Hermite on [0, 1]: value-left, slope-left, value-right, slope-right.
// Slope functions are scaled by the element length h so dofs are physical slopes;
// derivatives are taken with respect to the reference coordinate.
BasisValues1D hermite_cubic(double xi, double h);

}  // namespace vmm
