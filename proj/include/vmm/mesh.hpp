#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

namespace vmm {

struct IntervalMesh {
    double R = 1.0;
    std::vector<double> nodes;
    std::vector<std::array<int, 2>> elements;

    int num_elements() const { return static_cast<int>(elements.size()); }
    int num_nodes() const { return static_cast<int>(nodes.size()); }
    double left(int e) const { return nodes[elements[e][0]]; }
    double right(int e) const { return nodes[elements[e][1]]; }
    // Index of the element containing r (clamped to [0, R]).
    int locate(double r) const;
};

IntervalMesh build_interval_mesh(double R, int N);

struct Rectangle {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

enum BoundarySide : unsigned { kLeft = 1u, kRight = 2u, kBottom = 4u, kTop = 8u };

struct BoundaryEdge {
    std::array<int, 2> v;
    int triangle = -1;
    BoundarySide side = kBottom;
    Eigen::Vector2d normal;
    Eigen::Vector2d tangent;  // normal rotated by +90 degrees
};

struct TriangleMesh {
    Rectangle box;
    int nx = 0, ny = 0;
    std::vector<Eigen::Vector2d> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<BoundaryEdge> boundary_edges;

    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_vertices() const { return static_cast<int>(vertices.size()); }
    double hx() const { return (box.x1 - box.x0) / nx; }
    double hy() const { return (box.y1 - box.y0) / ny; }
    double h() const { return std::max(hx(), hy()); }
    Eigen::Matrix2d jacobian(int t) const;
    // Triangle containing x (points on shared edges resolve deterministically).
    int locate(const Eigen::Vector2d& x) const;
    bool contains(const Eigen::Vector2d& x, double tol = 1e-12) const;
};

// Structured nx-by-ny grid of rectangles, each cut along its SW-NE diagonal.
TriangleMesh build_rectangle_mesh(const Rectangle& box, int nx, int ny);

struct BoundaryQuadPoint {
    Eigen::Vector2d x;
    double weight;
    Eigen::Vector2d normal;
    Eigen::Vector2d tangent;
    int edge;
};

// Gauss points on every boundary edge, exact for polynomials of the given degree.
std::vector<BoundaryQuadPoint> boundary_trace_quadrature(const TriangleMesh& mesh, int degree);

}  // namespace vmm
