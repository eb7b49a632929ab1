#include "vmm/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "vmm/errors.hpp"

namespace vmm {

QuadratureRule1D gauss_legendre(int n)
{
    if (n < 1) throw InvalidArgument("gauss_legendre: need at least one point");
    auto legendre = [n](double x, double& dp) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        return p1;
    };
    QuadratureRule1D rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double dx = legendre(x, dp) / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        legendre(x, dp);
        // ascending order on [0, 1]
        rule.points[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

QuadratureRule1D interval_quadrature(int exactness)
{
    if (exactness < 0) throw InvalidArgument("interval_quadrature: negative exactness");
    return gauss_legendre(exactness / 2 + 1);
}

QuadratureRule2D triangle_quadrature(int exactness)
{
    if (exactness < 1 || exactness > 12)
        throw NotImplementedError("triangle_quadrature: exactness must lie in 1..12");
    // x = u, y = v (1 - u); the Jacobian (1 - u) raises the degree in u by one.
    const auto ru = gauss_legendre((exactness + 2) / 2 + ((exactness + 2) % 2));
    const auto rv = gauss_legendre((exactness + 1) / 2 + ((exactness + 1) % 2));
    QuadratureRule2D rule;
    rule.exactness = exactness;
    for (std::size_t i = 0; i < ru.points.size(); ++i)
        for (std::size_t j = 0; j < rv.points.size(); ++j) {
            double u = ru.points[i], v = rv.points[j];
            rule.points.emplace_back(u, v * (1.0 - u));
            rule.weights.push_back(ru.weights[i] * rv.weights[j] * (1.0 - u));
        }
    return rule;
}

}  // namespace vmm
