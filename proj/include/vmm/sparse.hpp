#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace vmm {

struct Triplet {
    int row, col;
    double value;
};

// Compressed sparse row matrix. Column indices within a row are sorted and unique.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

    // Duplicate (row, col) entries are summed.
    static SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& entries);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    long nnz() const { return static_cast<long>(values_.size()); }
    const std::vector<long>& row_offsets() const { return row_offsets_; }
    const std::vector<int>& column_indices() const { return column_indices_; }
    const std::vector<double>& values() const { return values_; }

    double coeff(int r, int c) const;
    double max_abs() const;
    Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;
    SparseMatrix transpose() const;
    Eigen::MatrixXd to_dense() const;
    Eigen::SparseMatrix<double> to_eigen() const;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<long> row_offsets_;
    std::vector<int> column_indices_;
    std::vector<double> values_;
};

struct LinearSolveReport {
    double residual_norm = 0.0;
    double relative_residual = 0.0;
    long nnz_matrix = 0;
    long nnz_factors = 0;
    double fill_ratio = 0.0;
    double min_pivot = 0.0;   // smallest |u_ii|
    double pivot_growth = 0.0;  // max |u_ii| / max |a_ij|
};

struct LinearSolveResult {
    Eigen::VectorXd x;
    LinearSolveReport report;
};

// Direct sparse LU. Throws SingularMatrixError when a pivot falls below
// pivot_tol * max|A| (the row of the offending pivot in the original ordering is reported).
LinearSolveResult solve(const SparseMatrix& A, const Eigen::VectorXd& b, double pivot_tol = 1e-14);

void write_matrix_market(const SparseMatrix& A, std::ostream& os);
void write_matrix_market(const SparseMatrix& A, const std::string& path);

}  // namespace vmm
