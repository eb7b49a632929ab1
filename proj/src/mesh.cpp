#include "vmm/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "vmm/errors.hpp"
#include "vmm/quadrature.hpp"

namespace vmm {

IntervalMesh build_interval_mesh(double R, int N)
{
    if (!(R > 0.0)) throw InvalidArgument("build_interval_mesh: R must be positive");
    if (N < 1) throw InvalidArgument("build_interval_mesh: N must be at least 1");
    IntervalMesh m;
    m.R = R;
    m.nodes.resize(N + 1);
    for (int i = 0; i <= N; ++i) m.nodes[i] = R * i / N;
    m.nodes[N] = R;
    for (int e = 0; e < N; ++e) m.elements.push_back({e, e + 1});
    return m;
}

int IntervalMesh::locate(double r) const
{
    auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
    int e = static_cast<int>(it - nodes.begin()) - 1;
    return std::clamp(e, 0, num_elements() - 1);
}

TriangleMesh build_rectangle_mesh(const Rectangle& box, int nx, int ny)
{
    if (nx < 1 || ny < 1) throw InvalidArgument("build_rectangle_mesh: need nx, ny >= 1");
    if (!(box.x1 > box.x0) || !(box.y1 > box.y0))
        throw InvalidArgument("build_rectangle_mesh: degenerate rectangle");
    TriangleMesh m;
    m.box = box;
    m.nx = nx;
    m.ny = ny;
    const double hx = (box.x1 - box.x0) / nx, hy = (box.y1 - box.y0) / ny;
    auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            double x = i == nx ? box.x1 : box.x0 + i * hx;
            double y = j == ny ? box.y1 : box.y0 + j * hy;
            m.vertices.emplace_back(x, y);
        }
    // cell (i, j) -> triangles 2*(j*nx+i) (below diagonal) and 2*(j*nx+i)+1 (above)
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int sw = vid(i, j), se = vid(i + 1, j), ne = vid(i + 1, j + 1), nw = vid(i, j + 1);
            m.triangles.push_back({sw, se, ne});
            m.triangles.push_back({sw, ne, nw});
        }
    auto add = [&m](int a, int b, int tri, BoundarySide side, Eigen::Vector2d n) {
        BoundaryEdge e;
        e.v = {a, b};
        e.triangle = tri;
        e.side = side;
        e.normal = n;
        e.tangent = Eigen::Vector2d(-n.y(), n.x());
        m.boundary_edges.push_back(e);
    };
    for (int i = 0; i < nx; ++i) add(vid(i, 0), vid(i + 1, 0), 2 * i, kBottom, {0.0, -1.0});
    for (int j = 0; j < ny; ++j)
        add(vid(nx, j), vid(nx, j + 1), 2 * (j * nx + nx - 1), kRight, {1.0, 0.0});
    for (int i = nx - 1; i >= 0; --i)
        add(vid(i + 1, ny), vid(i, ny), 2 * ((ny - 1) * nx + i) + 1, kTop, {0.0, 1.0});
    for (int j = ny - 1; j >= 0; --j)
        add(vid(0, j + 1), vid(0, j), 2 * (j * nx) + 1, kLeft, {-1.0, 0.0});
    return m;
}

Eigen::Matrix2d TriangleMesh::jacobian(int t) const
{
    const auto& tri = triangles[t];
    Eigen::Matrix2d J;
    J.col(0) = vertices[tri[1]] - vertices[tri[0]];
    J.col(1) = vertices[tri[2]] - vertices[tri[0]];
    return J;
}

bool TriangleMesh::contains(const Eigen::Vector2d& x, double tol) const
{
    return x.x() >= box.x0 - tol && x.x() <= box.x1 + tol && x.y() >= box.y0 - tol &&
           x.y() <= box.y1 + tol;
}

int TriangleMesh::locate(const Eigen::Vector2d& x) const
{
    if (!contains(x, 1e-10)) throw InvalidArgument("TriangleMesh::locate: point outside domain");
    double s = (x.x() - box.x0) / hx(), t = (x.y() - box.y0) / hy();
    int i = std::clamp(static_cast<int>(std::floor(s)), 0, nx - 1);
    int j = std::clamp(static_cast<int>(std::floor(t)), 0, ny - 1);
    double ls = s - i, lt = t - j;
    return 2 * (j * nx + i) + (lt > ls ? 1 : 0);
}

std::vector<BoundaryQuadPoint> boundary_trace_quadrature(const TriangleMesh& mesh, int degree)
{
    const auto rule = interval_quadrature(degree);
    std::vector<BoundaryQuadPoint> out;
    out.reserve(mesh.boundary_edges.size() * rule.points.size());
    for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
        const auto& e = mesh.boundary_edges[k];
        const Eigen::Vector2d a = mesh.vertices[e.v[0]], b = mesh.vertices[e.v[1]];
        const double len = (b - a).norm();
        for (std::size_t q = 0; q < rule.points.size(); ++q)
            out.push_back({a + rule.points[q] * (b - a), rule.weights[q] * len, e.normal,
                           e.tangent, static_cast<int>(k)});
    }
    return out;
}

}  // namespace vmm
