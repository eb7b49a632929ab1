#include "vmm/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <regex>

#include <Eigen/SparseLU>

#include "vmm/errors.hpp"

namespace vmm {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, const std::vector<Triplet>& entries)
{
    if (rows < 0 || cols < 0) throw InvalidArgument("SparseMatrix: negative dimension");
    SparseMatrix A(rows, cols);
    std::vector<long> count(rows + 1, 0);
    for (const auto& t : entries) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw InvalidArgument("SparseMatrix::from_triplets: index out of range");
        ++count[t.row + 1];
    }
    std::partial_sum(count.begin(), count.end(), count.begin());
    std::vector<std::pair<int, double>> buf(entries.size());
    std::vector<long> pos(count.begin(), count.end() - 1);
    for (const auto& t : entries) buf[pos[t.row]++] = {t.col, t.value};

    A.column_indices_.reserve(entries.size());
    A.values_.reserve(entries.size());
    for (int r = 0; r < rows; ++r) {
        auto first = buf.begin() + count[r], last = buf.begin() + count[r + 1];
        std::sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto it = first; it != last; ++it) {
            if (!A.column_indices_.empty() && static_cast<long>(A.column_indices_.size()) > A.row_offsets_[r] &&
                A.column_indices_.back() == it->first)
                A.values_.back() += it->second;
            else {
                A.column_indices_.push_back(it->first);
                A.values_.push_back(it->second);
            }
        }
        A.row_offsets_[r + 1] = static_cast<long>(A.values_.size());
    }
    return A;
}

double SparseMatrix::coeff(int r, int c) const
{
    auto first = column_indices_.begin() + row_offsets_[r];
    auto last = column_indices_.begin() + row_offsets_[r + 1];
    auto it = std::lower_bound(first, last, c);
    return it != last && *it == c ? values_[it - column_indices_.begin()] : 0.0;
}

double SparseMatrix::max_abs() const
{
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

Eigen::VectorXd SparseMatrix::operator*(const Eigen::VectorXd& x) const
{
    if (x.size() != cols_) throw InvalidArgument("SparseMatrix: dimension mismatch in product");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(rows_);
    for (int r = 0; r < rows_; ++r)
        for (long k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) y(r) += values_[k] * x(column_indices_[k]);
    return y;
}

SparseMatrix SparseMatrix::transpose() const
{
    std::vector<Triplet> t;
    t.reserve(values_.size());
    for (int r = 0; r < rows_; ++r)
        for (long k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) t.push_back({column_indices_[k], r, values_[k]});
    return from_triplets(cols_, rows_, t);
}

Eigen::MatrixXd SparseMatrix::to_dense() const
{
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(rows_, cols_);
    for (int r = 0; r < rows_; ++r)
        for (long k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) D(r, column_indices_[k]) = values_[k];
    return D;
}

Eigen::SparseMatrix<double> SparseMatrix::to_eigen() const
{
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(values_.size());
    for (int r = 0; r < rows_; ++r)
        for (long k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) t.emplace_back(r, column_indices_[k], values_[k]);
    Eigen::SparseMatrix<double> E(rows_, cols_);
    E.setFromTriplets(t.begin(), t.end());
    E.makeCompressed();
    return E;
}

LinearSolveResult solve(const SparseMatrix& A, const Eigen::VectorXd& b, double pivot_tol)
{
    if (A.rows() != A.cols()) throw InvalidArgument("solve: matrix is not square");
    if (b.size() != A.rows()) throw InvalidArgument("solve: right-hand side has wrong length");
    const int n = A.rows();
    LinearSolveResult out;
    if (n == 0) return out;
    const double amax = A.max_abs();
    if (amax == 0.0) throw SingularMatrixError("solve: zero matrix", 0, 0.0);

    Eigen::SparseMatrix<double> E = A.to_eigen();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(E);
    lu.factorize(E);
    if (lu.info() != Eigen::Success) {
        long idx = -1;
        std::smatch m;
        const std::string msg = lu.lastErrorMessage();
        if (std::regex_search(msg, m, std::regex("(\\d+)\\s*$"))) {
            // 1-based elimination step; map back to the original index
            const long step = std::stol(m[1]) - 1;
            const auto& cp = lu.colsPermutation().indices();
            for (int i = 0; i < cp.size(); ++i)
                if (cp(i) == step) idx = i;
        }
        throw SingularMatrixError("solve: factorization failed: " + msg, idx, 0.0);
    }

    // U's diagonal lives in the supernodal L storage.
    const auto& Lmap = lu.matrixL().m_mapL;
    using MapType = std::decay_t<decltype(Lmap)>;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    long nnz_l = 0;
    for (int j = 0; j < n; ++j)
        for (typename MapType::InnerIterator it(Lmap, j); it; ++it) {
            ++nnz_l;
            if (it.index() == j) diag(j) = it.value();
        }
    // position j of the factored matrix holds original row rinv[j]
    std::vector<long> rinv(n);
    const auto& rp = lu.rowsPermutation().indices();
    for (int i = 0; i < n; ++i) rinv[rp(i)] = i;
    Eigen::Index jmin = 0;
    const double pmin = diag.cwiseAbs().minCoeff(&jmin);
    if (!(pmin > pivot_tol * amax))
        throw SingularMatrixError("solve: pivot below threshold (near-singular matrix)", rinv[jmin], pmin);

    out.x = lu.solve(b);
    if (lu.info() != Eigen::Success) throw InternalError("solve: back substitution failed");
    const Eigen::VectorXd r = b - A * out.x;
    out.report.residual_norm = r.norm();
    out.report.relative_residual = b.norm() > 0 ? r.norm() / b.norm() : r.norm();
    out.report.nnz_matrix = A.nnz();
    out.report.nnz_factors = nnz_l + lu.matrixU().m_mapU.nonZeros();
    out.report.fill_ratio = double(out.report.nnz_factors) / double(std::max<long>(1, A.nnz()));
    out.report.min_pivot = pmin;
    out.report.pivot_growth = diag.cwiseAbs().maxCoeff() / amax;
    return out;
}

void write_matrix_market(const SparseMatrix& A, std::ostream& os)
{
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << A.rows() << ' ' << A.cols() << ' ' << A.nnz() << '\n';
    os.precision(17);
    const auto& off = A.row_offsets();
    for (int r = 0; r < A.rows(); ++r)
        for (long k = off[r]; k < off[r + 1]; ++k)
            os << r + 1 << ' ' << A.column_indices()[k] + 1 << ' ' << A.values()[k] << '\n';
}

void write_matrix_market(const SparseMatrix& A, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw IoError("write_matrix_market: cannot open " + path);
    write_matrix_market(A, os);
}

}  // namespace vmm
