#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "vmm/sparse.hpp"

namespace vmm {

struct NewtonOptions {
    double tol = 1e-10;   // on ||R|| / scale, or on a full Newton step relative to the iterate
    int max_iter = 40;
    int max_halvings = 8;
};

struct NewtonResult {
    Eigen::VectorXd x;
    std::vector<double> history;  // ||R|| / scale per iterate, starting with the initial guess
    int iterations = 0;
    bool converged = false;
};

struct NonlinearSystem {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
    std::function<SparseMatrix(const Eigen::VectorXd&)> jacobian;
};

// Damped Newton: the step is halved while the residual norm does not decrease.
// Throws NonConvergenceError (with the history) when the budget runs out.
NewtonResult newton_solve(const NonlinearSystem& sys, Eigen::VectorXd x0, double scale, const NewtonOptions& opts);

}  // namespace vmm
