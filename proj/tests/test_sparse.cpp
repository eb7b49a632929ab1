#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "vmm/errors.hpp"
#include "vmm/sparse.hpp"

using namespace vmm;

namespace {

// Dense Gaussian elimination with partial pivoting.
Eigen::VectorXd dense_lu_solve(Eigen::MatrixXd A, Eigen::VectorXd b)
{
    const int n = static_cast<int>(A.rows());
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(A(i, k)) > std::abs(A(p, k))) p = i;
        A.row(k).swap(A.row(p));
        std::swap(b(k), b(p));
        for (int i = k + 1; i < n; ++i) {
            double m = A(i, k) / A(k, k);
            for (int j = k; j < n; ++j) A(i, j) -= m * A(k, j);
            b(i) -= m * b(k);
        }
    }
    Eigen::VectorXd x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = b(i);
        for (int j = i + 1; j < n; ++j) s -= A(i, j) * x(j);
        x(i) = s / A(i, i);
    }
    return x;
}

std::vector<Triplet> random_sparse(int n, double density, std::mt19937& rng, bool dominant)
{
    std::uniform_real_distribution<double> U(-1.0, 1.0), P(0.0, 1.0);
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (i != j && P(rng) < density) t.push_back({i, j, U(rng)});
        t.push_back({i, i, dominant ? n * 1.0 : U(rng) + 3.0});
    }
    return t;
}

}  // namespace

TEST(SparseMatrix, TripletsSumDuplicatesAndSortColumns)
{
    auto A = SparseMatrix::from_triplets(2, 3, {{0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 3.0}, {1, 1, -1.0}});
    EXPECT_EQ(A.nnz(), 3);
    EXPECT_DOUBLE_EQ(A.coeff(0, 2), 4.0);
    EXPECT_DOUBLE_EQ(A.coeff(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(A.coeff(0, 1), 0.0);
    EXPECT_EQ(A.column_indices()[0], 0);
    EXPECT_EQ(A.column_indices()[1], 2);
    EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), InvalidArgument);
}

TEST(SparseMatrix, ProductAndTransposeMatchDense)
{
    std::mt19937 rng(3);
    auto A = SparseMatrix::from_triplets(40, 40, random_sparse(40, 0.1, rng, false));
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(40, -2, 3);
    EXPECT_LT((A * x - A.to_dense() * x).norm(), 1e-13);
    EXPECT_LT((A.transpose().to_dense() - A.to_dense().transpose()).norm(), 1e-15);
}

TEST(SparseSolve, OneByOne)
{
    auto A = SparseMatrix::from_triplets(1, 1, {{0, 0, 2.0}});
    auto r = solve(A, Eigen::VectorXd::Constant(1, 4.0));
    EXPECT_DOUBLE_EQ(r.x(0), 2.0);
}

TEST(SparseSolve, MatchesDenseOracle)
{
    std::mt19937 rng(11);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 30 + 20 * trial;
        auto A = SparseMatrix::from_triplets(n, n, random_sparse(n, 0.08, rng, trial % 2 == 0));
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) b(i) = U(rng);
        auto r = solve(A, b);
        Eigen::VectorXd xo = dense_lu_solve(A.to_dense(), b);
        EXPECT_LT((r.x - xo).norm() / xo.norm(), 1e-10);
        EXPECT_LT(r.report.relative_residual, 1e-12);
        EXPECT_GE(r.report.nnz_factors, A.nnz() / 2);
        EXPECT_GT(r.report.min_pivot, 0.0);
    }
}

TEST(SparseSolve, ZeroMatrixIsSingular)
{
    SparseMatrix Z = SparseMatrix::from_triplets(3, 3, {});
    EXPECT_THROW(solve(Z, Eigen::VectorXd::Ones(3)), SingularMatrixError);
}

TEST(SparseSolve, RankDeficientReportsPivot)
{
    // third row is the sum of the first two
    auto A = SparseMatrix::from_triplets(3, 3,
                                         {{0, 0, 1}, {0, 1, 2}, {1, 1, 1}, {1, 2, 1}, {2, 0, 1}, {2, 1, 3}, {2, 2, 1}});
    try {
        solve(A, Eigen::VectorXd::Ones(3));
        FAIL() << "expected SingularMatrixError";
    } catch (const SingularMatrixError& e) {
        EXPECT_GE(e.row(), 0);
        EXPECT_LT(e.row(), 3);
    }
}

TEST(SparseSolve, DimensionChecks)
{
    auto A = SparseMatrix::from_triplets(2, 3, {{0, 0, 1.0}});
    EXPECT_THROW(solve(A, Eigen::VectorXd::Ones(2)), InvalidArgument);
}

TEST(MatrixMarket, WritesCoordinateFormat)
{
    auto A = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.5}, {1, 0, -2.0}});
    std::ostringstream os;
    write_matrix_market(A, os);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "%%MatrixMarket matrix coordinate real general");
    int r, c;
    long nnz;
    is >> r >> c >> nnz;
    EXPECT_EQ(r, 2);
    EXPECT_EQ(c, 2);
    EXPECT_EQ(nnz, 2);
    int i, j;
    double v;
    is >> i >> j >> v;
    EXPECT_EQ(i, 1);
    EXPECT_EQ(j, 1);
    EXPECT_DOUBLE_EQ(v, 1.5);
}
