#include "vmm/newton.hpp"

#include <cmath>
#include <string>

#include "vmm/errors.hpp"

namespace vmm {

NewtonResult newton_solve(const NonlinearSystem& sys, Eigen::VectorXd x0, double scale, const NewtonOptions& opts)
{
    if (!(scale > 0.0)) scale = 1.0;
    NewtonResult out;
    out.x = std::move(x0);
    Eigen::VectorXd r = sys.residual(out.x);
    double rn = r.norm();
    out.history.push_back(rn / scale);
    for (int it = 0; it < opts.max_iter; ++it) {
        if (!std::isfinite(rn)) break;
        if (rn <= opts.tol * scale) {
            out.converged = true;
            return out;
        }
        const Eigen::VectorXd dx = solve(sys.jacobian(out.x), -r).x;
        // a step this small means the iterate is accurate to about tol^2 even when
        // the residual sits on its round-off floor
        if (dx.lpNorm<Eigen::Infinity>() <= opts.tol * (1.0 + out.x.lpNorm<Eigen::Infinity>())) {
            out.x += dx;
            out.history.push_back(sys.residual(out.x).norm() / scale);
            ++out.iterations;
            out.converged = true;
            return out;
        }
        double step = 1.0;
        Eigen::VectorXd xt = out.x + dx, rt = sys.residual(xt);
        for (int k = 0; k < opts.max_halvings && !(rt.norm() < rn); ++k) {
            step *= 0.5;
            xt = out.x + step * dx;
            rt = sys.residual(xt);
        }
        out.x = std::move(xt);
        r = std::move(rt);
        rn = r.norm();
        out.history.push_back(rn / scale);
        ++out.iterations;
    }
    if (std::isfinite(rn) && rn <= opts.tol * scale) {
        out.converged = true;
        return out;
    }
    throw NonConvergenceError("newton_solve: no convergence after " + std::to_string(out.iterations) +
                                  " iterations (residual " + std::to_string(rn / scale) + ")",
                              out.history);
}

}  // namespace vmm
