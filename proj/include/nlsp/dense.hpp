#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "nlsp/errors.hpp"
#include "nlsp/rng.hpp"

namespace nlsp {

// Row-major dense matrix of 64-bit floats.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }
    double* row(std::size_t i) { return a_.data() + i * cols_; }
    const double* row(std::size_t i) const { return a_.data() + i * cols_; }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    bool all_finite() const {
        for (double v : a_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

inline DenseMatrix randn_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

inline DenseMatrix transpose(const DenseMatrix& m) {
    DenseMatrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

// C = A * B, ikj order so the inner loop runs over contiguous rows.
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw ValidationError("matmul: inner dimensions differ");
    DenseMatrix c(a.rows(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

// C = A^T * B
inline DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) throw ValidationError("matmul_tn: row counts differ");
    DenseMatrix c(a.cols(), b.cols(), 0.0);
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* ak = a.row(k);
        const double* bk = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = ak[i];
            if (aki == 0.0) continue;
            double* ci = c.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
        }
    }
    return c;
}

inline std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x) {
    if (a.cols() != x.size()) throw ValidationError("matvec: dimension mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
        y[i] = s;
    }
    return y;
}

inline std::vector<double> matvec_t(const DenseMatrix& a, const std::vector<double>& x) {
    if (a.rows() != x.size()) throw ValidationError("matvec_t: dimension mismatch");
    std::vector<double> y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        const double xi = x[i];
        for (std::size_t j = 0; j < a.cols(); ++j) y[j] += ai[j] * xi;
    }
    return y;
}

inline double sum_squares(const DenseMatrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
    return s;
}

inline double frobenius_norm(const DenseMatrix& m) { return std::sqrt(sum_squares(m)); }

// squared norm of each column, fixed row-major accumulation order
inline std::vector<double> column_squared_norms(const DenseMatrix& m) {
    std::vector<double> e(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* ri = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) e[j] += ri[j] * ri[j];
    }
    return e;
}

inline double max_abs(const DenseMatrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s = std::max(s, std::abs(m(i, j)));
    return s;
}

inline std::vector<double> get_col(const DenseMatrix& m, std::size_t j) {
    std::vector<double> c(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) c[i] = m(i, j);
    return c;
}

inline void set_col(DenseMatrix& m, std::size_t j, const std::vector<double>& c) {
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = c[i];
}

inline DenseMatrix first_cols(const DenseMatrix& m, std::size_t k) {
    if (k > m.cols()) throw ValidationError("first_cols: k exceeds column count");
    DenseMatrix r(m.rows(), k);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < k; ++j) r(i, j) = m(i, j);
    return r;
}

inline DenseMatrix permute_cols(const DenseMatrix& m, const std::vector<std::size_t>& perm) {
    if (perm.size() != m.cols()) throw ValidationError("permute_cols: bad permutation size");
    DenseMatrix r(m.rows(), m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) r(i, j) = m(i, perm[j]);
    return r;
}

// max |A^T A - I|
inline double orthonormality_defect(const DenseMatrix& m) {
    DenseMatrix g = matmul_tn(m, m);
    double d = 0.0;
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j)
            d = std::max(d, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
    return d;
}

// --- serialization ---------------------------------------------------------
// Binary layout: rows and cols as little-endian u64, then row-major f64.

inline void save_dense_binary(const DenseMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path);
    const std::uint64_t dims[2] = {m.rows(), m.cols()};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * m.rows() * m.cols()));
    if (!out) throw IoError("write failed: " + path);
}

inline DenseMatrix load_dense_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for read: " + path);
    std::uint64_t dims[2];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in) throw IoError("truncated header: " + path);
    DenseMatrix m(static_cast<std::size_t>(dims[0]), static_cast<std::size_t>(dims[1]));
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.rows() * m.cols()));
    if (!in) throw IoError("truncated payload: " + path);
    return m;
}

// shortest decimal form that round-trips a double exactly
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline void save_dense_csv(const DenseMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

} // namespace nlsp
