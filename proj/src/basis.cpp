#include "vmm/basis.hpp"

#include <cmath>

#include "vmm/errors.hpp"

namespace vmm {

namespace {

double ipow(double x, int p) { return p <= 0 ? 1.0 : std::pow(x, p); }

}  // namespace

LagrangeTriangle::LagrangeTriangle(int degree) : degree_(degree)
{
    if (degree < 1 || degree > 3) throw NotImplementedError("LagrangeTriangle: degree must be 1, 2 or 3");
    for (int j = 0; j <= degree; ++j)
        for (int i = 0; i + j <= degree; ++i) {
            lattice_.emplace_back(i, j);
            nodes_.emplace_back(double(i) / degree, double(j) / degree);
            monomials_.emplace_back(i, j);
        }
    const int n = size();
    Eigen::MatrixXd V(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            V(r, c) = ipow(nodes_[r].x(), monomials_[c].x()) * ipow(nodes_[r].y(), monomials_[c].y());
    coeff_ = V.fullPivLu().inverse();
}

BasisValues2D LagrangeTriangle::eval(const Eigen::Vector2d& xi) const
{
    const double tol = 1e-12;
    if (xi.x() < -tol || xi.y() < -tol || xi.x() + xi.y() > 1.0 + tol)
        throw InvalidArgument("LagrangeTriangle::eval: point outside reference triangle");
    const int n = size();
    Eigen::VectorXd m(n), mx(n), my(n), mxx(n), mxy(n), myy(n);
    const double x = xi.x(), y = xi.y();
    for (int c = 0; c < n; ++c) {
        int a = monomials_[c].x(), b = monomials_[c].y();
        m(c) = ipow(x, a) * ipow(y, b);
        mx(c) = a > 0 ? a * ipow(x, a - 1) * ipow(y, b) : 0.0;
        my(c) = b > 0 ? b * ipow(x, a) * ipow(y, b - 1) : 0.0;
        mxx(c) = a > 1 ? a * (a - 1) * ipow(x, a - 2) * ipow(y, b) : 0.0;
        mxy(c) = a > 0 && b > 0 ? a * b * ipow(x, a - 1) * ipow(y, b - 1) : 0.0;
        myy(c) = b > 1 ? b * (b - 1) * ipow(x, a) * ipow(y, b - 2) : 0.0;
    }
    BasisValues2D out;
    out.value = coeff_.transpose() * m;
    out.grad.resize(n, 2);
    out.grad.col(0) = coeff_.transpose() * mx;
    out.grad.col(1) = coeff_.transpose() * my;
    out.hess.resize(n, 3);
    out.hess.col(0) = coeff_.transpose() * mxx;
    out.hess.col(1) = coeff_.transpose() * mxy;
    out.hess.col(2) = coeff_.transpose() * myy;
    return out;
}

void push_forward(BasisValues2D& v, const Eigen::Matrix2d& J)
{
    const Eigen::Matrix2d Jinv = J.inverse();
    // grad_x = J^{-T} grad_xi ; hess_x = J^{-T} hess_xi J^{-1}
    v.grad = v.grad * Jinv;
    for (int b = 0; b < v.hess.rows(); ++b) {
        Eigen::Matrix2d H;
        H << v.hess(b, 0), v.hess(b, 1), v.hess(b, 1), v.hess(b, 2);
        Eigen::Matrix2d P = Jinv.transpose() * H * Jinv;
        v.hess(b, 0) = P(0, 0);
        v.hess(b, 1) = P(0, 1);
        v.hess(b, 2) = P(1, 1);
    }
}

LagrangeInterval::LagrangeInterval(int degree) : degree_(degree)
{
    if (degree < 1 || degree > 3) throw NotImplementedError("LagrangeInterval: degree must be 1, 2 or 3");
    const int n = size();
    Eigen::MatrixXd V(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) V(r, c) = ipow(double(r) / degree, c);
    coeff_ = V.fullPivLu().inverse();
}

BasisValues1D LagrangeInterval::eval(double xi) const
{
    if (xi < -1e-12 || xi > 1.0 + 1e-12)
        throw InvalidArgument("LagrangeInterval::eval: point outside [0, 1]");
    const int n = size();
    Eigen::VectorXd m(n), m1(n), m2(n);
    for (int c = 0; c < n; ++c) {
        m(c) = ipow(xi, c);
        m1(c) = c > 0 ? c * ipow(xi, c - 1) : 0.0;
        m2(c) = c > 1 ? c * (c - 1) * ipow(xi, c - 2) : 0.0;
    }
    return {coeff_.transpose() * m, coeff_.transpose() * m1, coeff_.transpose() * m2};
}

BasisValues1D hermite_cubic(double t, double h)
{
    if (t < -1e-12 || t > 1.0 + 1e-12) throw InvalidArgument("hermite_cubic: point outside [0, 1]");
    BasisValues1D b;
    b.value.resize(4);
    b.d1.resize(4);
    b.d2.resize(4);
    const double t2 = t * t, t3 = t2 * t;
    b.value << 1 - 3 * t2 + 2 * t3, h * (t - 2 * t2 + t3), 3 * t2 - 2 * t3, h * (-t2 + t3);
    b.d1 << -6 * t + 6 * t2, h * (1 - 4 * t + 3 * t2), 6 * t - 6 * t2, h * (-2 * t + 3 * t2);
    b.d2 << -6 + 12 * t, h * (-4 + 6 * t), 6 - 12 * t, h * (-2 + 6 * t);
    return b;
}

}  // namespace vmm
