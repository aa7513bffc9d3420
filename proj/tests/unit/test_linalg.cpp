#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "nlsp/cholesky.hpp"
#include "nlsp/dense.hpp"
#include "nlsp/qr.hpp"
#include "nlsp/rng.hpp"
#include "nlsp/sparse.hpp"
#include "nlsp/svd.hpp"

using namespace nlsp;

namespace {

// dense matvec used as the independent reference for spmv
std::vector<double> dense_matvec_oracle(const DenseMatrix& a, const std::vector<double>& x) {
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
    return y;
}

SparseCsrMatrix random_sparse(std::size_t n, double density, Rng& rng) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (rng.uniform() < density) trip.emplace_back(i, j, rng.normal());
    return SparseCsrMatrix::from_triplets(n, std::move(trip));
}

DenseMatrix random_spd(std::size_t n, Rng& rng, double shift) {
    DenseMatrix b = randn_matrix(n, n, rng);
    DenseMatrix a = matmul_tn(b, b);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += shift;
    return a;
}

// PSD with unit-scale spectrum
DenseMatrix random_psd(std::size_t n, Rng& rng) {
    DenseMatrix b = randn_matrix(n, n, rng);
    DenseMatrix a = matmul_tn(b, b);
    const double s = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) *= s;
    return a;
}

DenseMatrix random_orthonormal(std::size_t n, std::size_t k, Rng& rng) {
    return qr_thin(randn_matrix(n, k, rng)).q;
}

} // namespace

TEST(Spmv, IdentityPassesThrough) {
    auto a = SparseCsrMatrix::identity(3);
    std::vector<double> x = {1.0, 2.0, 3.0};
    auto y = spmv(a, x);
    EXPECT_EQ(y, x);
}

TEST(Spmv, StencilOnConstantVector) {
    auto a = SparseCsrMatrix::from_triplets(
        2, {{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}});
    auto y = spmv(a, {1.0, 1.0});
    EXPECT_DOUBLE_EQ(y[0], 1.0);
    EXPECT_DOUBLE_EQ(y[1], 1.0);
}

TEST(Spmv, MatchesDenseOracle) {
    Rng rng(42);
    auto a = random_sparse(50, 0.15, rng);
    auto ad = a.to_dense();
    std::vector<double> x(50);
    for (auto& v : x) v = rng.normal();
    auto y = spmv(a, x);
    auto ref = dense_matvec_oracle(ad, x);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        num += (y[i] - ref[i]) * (y[i] - ref[i]);
        den += ref[i] * ref[i];
    }
    EXPECT_LT(std::sqrt(num), 1e-14 * std::sqrt(den) + 1e-300);
}

TEST(Spmv, DimensionMismatchRejected) {
    auto a = SparseCsrMatrix::identity(3);
    EXPECT_THROW(spmv(a, {1.0, 2.0}), ValidationError);
}

TEST(SparseCsr, TripletsDeduplicatedAndSorted) {
    auto a = SparseCsrMatrix::from_triplets(2, {{0, 1, 1.0}, {0, 0, 2.0}, {0, 1, 0.5}});
    EXPECT_EQ(a.nnz(), 2u);
    EXPECT_DOUBLE_EQ(a.at(0, 1), 1.5);
    EXPECT_DOUBLE_EQ(a.at(0, 0), 2.0);
    ASSERT_EQ(a.col_idx().size(), 2u);
    EXPECT_LT(a.col_idx()[0], a.col_idx()[1]);
}

TEST(QrThin, OrthonormalInputIsFixedPoint) {
    Rng rng(7);
    auto q0 = random_orthonormal(30, 6, rng);
    auto f = qr_thin(q0);
    for (std::size_t i = 0; i < 30; ++i)
        for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(f.q(i, j), q0(i, j), 1e-12);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            EXPECT_NEAR(f.r(i, j), i == j ? 1.0 : 0.0, 1e-12);
}

TEST(QrThin, HandChecked2x1) {
    DenseMatrix m(2, 1);
    m(0, 0) = 3.0;
    m(1, 0) = 4.0;
    auto f = qr_thin(m);
    EXPECT_NEAR(f.q(0, 0), 0.6, 1e-15);
    EXPECT_NEAR(f.q(1, 0), 0.8, 1e-15);
    EXPECT_NEAR(f.r(0, 0), 5.0, 1e-15);
}

TEST(QrThin, ReconstructsRandomMatrix) {
    Rng rng(11);
    DenseMatrix m = randn_matrix(100, 16, rng);
    auto f = qr_thin(m);
    EXPECT_LT(orthonormality_defect(f.q), 1e-10);
    DenseMatrix back = matmul(f.q, f.r);
    double err = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            err += (back(i, j) - m(i, j)) * (back(i, j) - m(i, j));
    EXPECT_LT(std::sqrt(err), 1e-10 * frobenius_norm(m));
    for (std::size_t j = 0; j < 16; ++j) EXPECT_GE(f.r(j, j), 0.0);
}

TEST(QrThin, RankDeficiencyDetected) {
    DenseMatrix m(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        m(i, 0) = static_cast<double>(i + 1);
        m(i, 1) = 2.0 * static_cast<double>(i + 1);
    }
    EXPECT_THROW(qr_thin(m), RankDeficiencyError);
}

TEST(QrThin, IdempotentOnOwnOutput) {
    Rng rng(13);
    DenseMatrix m = randn_matrix(40, 8, rng);
    auto q1 = qr_thin(m).q;
    auto q2 = qr_thin(q1).q;
    for (std::size_t i = 0; i < q1.rows(); ++i)
        for (std::size_t j = 0; j < q1.cols(); ++j)
            EXPECT_NEAR(std::abs(q2(i, j)), std::abs(q1(i, j)), 1e-12);
}

TEST(SvdOracle, DiagonalCase) {
    DenseMatrix s(3, 2);
    s(0, 0) = 3.0;
    s(1, 1) = 2.0;
    auto f = svd_oracle(s);
    ASSERT_EQ(f.singular_values.size(), 2u);
    EXPECT_NEAR(f.singular_values[0], 3.0, 1e-12);
    EXPECT_NEAR(f.singular_values[1], 2.0, 1e-12);
    EXPECT_NEAR(std::abs(f.left_vectors(0, 0)), 1.0, 1e-10);
    EXPECT_GE(f.left_vectors(0, 0), 0.0); // sign convention
}

TEST(SvdOracle, RankOneCollapses) {
    Rng rng(3);
    std::vector<double> a(20), b(6);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    DenseMatrix s(20, 6);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = 0; j < 6; ++j) s(i, j) = a[i] * b[j];
    auto f = svd_oracle(s);
    EXPECT_LT(f.singular_values[1] / f.singular_values[0], 1e-12);
    EXPECT_LT(orthonormality_defect(f.left_vectors), 1e-10);
}

TEST(SvdOracle, ReconstructsRandomMatrix) {
    Rng rng(5);
    DenseMatrix s = randn_matrix(20, 8, rng);
    auto f = svd_oracle(s);
    auto back = svd_reconstruct(f);
    double err = 0.0;
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j)
            err += (back(i, j) - s(i, j)) * (back(i, j) - s(i, j));
    EXPECT_LT(std::sqrt(err), 1e-9 * frobenius_norm(s));
    for (std::size_t i = 0; i + 1 < f.singular_values.size(); ++i)
        EXPECT_GE(f.singular_values[i], f.singular_values[i + 1]);
    EXPECT_LT(orthonormality_defect(f.left_vectors), 1e-10);
    EXPECT_LT(orthonormality_defect(f.right_vectors), 1e-10);
}

TEST(SvdOracle, WideMatrixHandled) {
    Rng rng(17);
    DenseMatrix s = randn_matrix(8, 20, rng);
    auto f = svd_oracle(s);
    auto back = svd_reconstruct(f);
    double err = 0.0;
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j)
            err += (back(i, j) - s(i, j)) * (back(i, j) - s(i, j));
    EXPECT_LT(std::sqrt(err), 1e-9 * frobenius_norm(s));
}

TEST(CapturedEnergy, CompleteBasisIsOne) {
    Rng rng(23);
    auto p = random_orthonormal(12, 12, rng);
    auto s = randn_matrix(12, 5, rng);
    EXPECT_NEAR(captured_energy(p, s), 1.0, 1e-12);
}

TEST(CapturedEnergy, DiagonalCase) {
    DenseMatrix s(3, 2);
    s(0, 0) = 3.0;
    s(1, 1) = 2.0;
    DenseMatrix p(3, 1);
    p(0, 0) = 1.0;
    EXPECT_NEAR(captured_energy(p, s), 9.0 / 13.0, 1e-15);
}

TEST(CapturedEnergy, TopSingularVectorsAttainPartialSums) {
    Rng rng(31);
    DenseMatrix s = randn_matrix(30, 10, rng);
    auto f = svd_oracle(s);
    double total = 0.0;
    for (double sv : f.singular_values) total += sv * sv;
    for (std::size_t r = 1; r <= 10; r += 3) {
        double part = 0.0;
        for (std::size_t i = 0; i < r; ++i) part += f.singular_values[i] * f.singular_values[i];
        auto pr = first_cols(f.left_vectors, r);
        EXPECT_NEAR(captured_energy(pr, s), part / total, 1e-10);
    }
}

TEST(CapturedEnergy, NonOrthonormalRejected) {
    DenseMatrix p(3, 1);
    p(0, 0) = 2.0;
    DenseMatrix s(3, 2, 1.0);
    EXPECT_THROW(captured_energy(p, s), ValidationError);
}

TEST(CapturedEnergy, InvariantUnderOrthogonalMix) {
    Rng rng(37);
    auto p = random_orthonormal(25, 6, rng);
    auto s = randn_matrix(25, 9, rng);
    auto q = random_orthonormal(6, 6, rng);
    auto mixed = matmul(p, q);
    EXPECT_NEAR(captured_energy(mixed, s), captured_energy(p, s), 1e-10);
}

TEST(CapturedEnergy, SvdBasisBeats200RandomCompetitors) {
    Rng rng(41);
    DenseMatrix s = randn_matrix(24, 9, rng);
    auto f = svd_oracle(s);
    const std::size_t r = 3;
    const double best = captured_energy(first_cols(f.left_vectors, r), s);
    for (int trial = 0; trial < 200; ++trial) {
        auto p = random_orthonormal(24, r, rng);
        EXPECT_LE(captured_energy(p, s), best + 1e-12);
    }
}

TEST(Cholesky, IdentityReturnsRhs) {
    auto x = cholesky_solve(DenseMatrix::identity(4), {1.0, -2.0, 0.5, 3.0});
    EXPECT_DOUBLE_EQ(x[0], 1.0);
    EXPECT_DOUBLE_EQ(x[1], -2.0);
    EXPECT_DOUBLE_EQ(x[2], 0.5);
    EXPECT_DOUBLE_EQ(x[3], 3.0);
}

TEST(Cholesky, HandChecked2x2) {
    DenseMatrix a(2, 2);
    a(0, 0) = 4.0;
    a(0, 1) = 2.0;
    a(1, 0) = 2.0;
    a(1, 1) = 3.0;
    auto x = cholesky_solve(a, {4.0, 2.0});
    EXPECT_NEAR(x[0], 1.0, 1e-14);
    EXPECT_NEAR(x[1], 0.0, 1e-14);
}

TEST(Cholesky, ResidualOnRandomSpd) {
    Rng rng(53);
    auto a = random_spd(64, rng, 8.0);
    std::vector<double> rhs(64);
    for (auto& v : rhs) v = rng.normal();
    CholeskyFactor f(a);
    auto x = f.solve(rhs);
    auto ax = matvec(a, x);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 64; ++i) {
        num += (ax[i] - rhs[i]) * (ax[i] - rhs[i]);
        den += rhs[i] * rhs[i];
    }
    EXPECT_LT(std::sqrt(num), 1e-9 * std::sqrt(den));
    // factorization reusable
    auto x2 = f.solve(rhs);
    EXPECT_EQ(x, x2);
}

TEST(Cholesky, IndefiniteRejected) {
    DenseMatrix a(2, 2);
    a(0, 0) = 1.0;
    a(0, 1) = 2.0;
    a(1, 0) = 2.0;
    a(1, 1) = 1.0;
    EXPECT_THROW(CholeskyFactor f(a), NotSpdError);
}

TEST(Cholesky, AsymmetryRejected) {
    DenseMatrix a(2, 2);
    a(0, 0) = 2.0;
    a(0, 1) = 1.0;
    a(1, 0) = 0.5;
    a(1, 1) = 2.0;
    EXPECT_THROW(CholeskyFactor f(a), NotSpdError);
}

// Tr(AB) <= sum_i alpha_i beta_i over sorted singular values, PSD pairs
TEST(TraceInequality, HoldsOnRandomPsdPairs) {
    Rng rng(59);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.index(9);
        auto a = random_psd(n, rng);
        auto b = random_psd(n, rng);
        auto fa = svd_oracle(a);
        auto fb = svd_oracle(b);
        double trace = 0.0;
        auto ab = matmul(a, b);
        for (std::size_t i = 0; i < n; ++i) trace += ab(i, i);
        double bound = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            bound += fa.singular_values[i] * fb.singular_values[i];
        EXPECT_LE(trace, bound + 1e-10);
    }
}

TEST(PrincipalAngles, IdenticalSpansGiveZero) {
    Rng rng(61);
    auto p = random_orthonormal(15, 4, rng);
    auto q = random_orthonormal(4, 4, rng);
    auto angles = principal_angles(p, matmul(p, q));
    for (double a : angles) EXPECT_NEAR(a, 0.0, 1e-7);
}

TEST(DenseIo, BinaryRoundTripIsExact) {
    Rng rng(67);
    DenseMatrix m = randn_matrix(7, 5, rng);
    const std::string path = ::testing::TempDir() + "nlsp_dense_roundtrip.bin";
    save_dense_binary(m, path);
    auto back = load_dense_binary(path);
    ASSERT_EQ(back.rows(), m.rows());
    ASSERT_EQ(back.cols(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) EXPECT_EQ(back(i, j), m(i, j));
}

TEST(DenseIo, CsvExportParsesBack) {
    DenseMatrix m(2, 3);
    m(0, 0) = 1.5;
    m(0, 1) = -2.25;
    m(0, 2) = 1.0 / 3.0;
    m(1, 2) = 1e-17;
    const std::string path = ::testing::TempDir() + "nlsp_dense_export.csv";
    save_dense_csv(m, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, 10), "1.5,-2.25,");
    double third = 0.0;
    std::sscanf(line.c_str() + 10, "%lf", &third);
    EXPECT_EQ(third, 1.0 / 3.0);
}

TEST(MatrixMarketIo, SymmetricRoundTrip) {
    Rng rng(71);
    auto b = random_sparse(12, 0.3, rng);
    // symmetrize
    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t k = b.row_ptr()[i]; k < b.row_ptr()[i + 1]; ++k) {
            trip.emplace_back(i, b.col_idx()[k], b.values()[k]);
            trip.emplace_back(b.col_idx()[k], i, b.values()[k]);
        }
    for (std::size_t i = 0; i < 12; ++i) trip.emplace_back(i, i, 10.0);
    auto a = SparseCsrMatrix::from_triplets(12, std::move(trip));
    const std::string path = ::testing::TempDir() + "nlsp_mm_roundtrip.mtx";
    save_matrix_market(a, path);
    auto back = load_matrix_market(path);
    ASSERT_EQ(back.dim(), a.dim());
    ASSERT_EQ(back.nnz(), a.nnz());
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 12; ++j) EXPECT_EQ(back.at(i, j), a.at(i, j));
}
