#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vmm {

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotImplementedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(const std::string& what, long row, double pivot)
        : std::runtime_error(what), row_(row), pivot_(pivot) {}
    long row() const { return row_; }
    double pivot() const { return pivot_; }

private:
    long row_;
    double pivot_;
};

// Raised when an iteration runs out of budget; carries the residual history.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const { return history_; }

private:
    std::vector<double> history_;
};

// A threshold search found a feasible sample above an infeasible one.
class NonMonotoneError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace vmm
