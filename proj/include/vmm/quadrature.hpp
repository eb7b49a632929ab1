#pragma once

#include <vector>

#include <Eigen/Dense>

namespace vmm {

struct QuadratureRule1D {
    std::vector<double> points;   // on [0, 1]
    std::vector<double> weights;  // sum to 1
};

struct QuadratureRule2D {
    std::vector<Eigen::Vector2d> points;  // on the reference triangle (0,0),(1,0),(0,1)
    std::vector<double> weights;          // sum to 1/2
    int exactness = 0;
};

// n-point Gauss-Legendre rule mapped to [0, 1].
QuadratureRule1D gauss_legendre(int n);

// Gauss rule on [0, 1] exact for polynomials of the given degree.
QuadratureRule1D interval_quadrature(int exactness);

// Collapsed-coordinate Gauss product rule, positive weights, exactness 1..12.
QuadratureRule2D triangle_quadrature(int exactness);

}  // namespace vmm
