#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "nlsp/dense.hpp"
#include "nlsp/errors.hpp"

namespace nlsp {

// Square sparse matrix, compressed sparse row. Columns sorted within each
// row, no duplicates.
class SparseCsrMatrix {
public:
    SparseCsrMatrix() = default;

    // Builds from (i, j, v) triplets; duplicates are summed, zeros kept out.
    static SparseCsrMatrix from_triplets(std::size_t dim,
                                         std::vector<std::tuple<std::size_t, std::size_t, double>> trip) {
        for (const auto& [i, j, v] : trip) {
            (void)v;
            if (i >= dim || j >= dim) throw ValidationError("triplet index out of range");
        }
        std::sort(trip.begin(), trip.end(), [](const auto& a, const auto& b) {
            return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
        });
        SparseCsrMatrix m;
        m.dim_ = dim;
        m.row_ptr_.assign(dim + 1, 0);
        std::size_t k = 0;
        while (k < trip.size()) {
            const std::size_t i = std::get<0>(trip[k]);
            const std::size_t j = std::get<1>(trip[k]);
            double v = 0.0;
            while (k < trip.size() && std::get<0>(trip[k]) == i && std::get<1>(trip[k]) == j) {
                v += std::get<2>(trip[k]);
                ++k;
            }
            if (v != 0.0) {
                m.col_idx_.push_back(j);
                m.values_.push_back(v);
                ++m.row_ptr_[i + 1];
            }
        }
        for (std::size_t i = 0; i < dim; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
        return m;
    }

    static SparseCsrMatrix identity(std::size_t dim) {
        std::vector<std::tuple<std::size_t, std::size_t, double>> t;
        t.reserve(dim);
        for (std::size_t i = 0; i < dim; ++i) t.emplace_back(i, i, 1.0);
        return from_triplets(dim, std::move(t));
    }

    std::size_t dim() const { return dim_; }
    std::size_t nnz() const { return values_.size(); }
    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::size_t>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }

    double at(std::size_t i, std::size_t j) const {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            if (col_idx_[k] == j) return values_[k];
        return 0.0;
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(dim_, 0.0);
        for (std::size_t i = 0; i < dim_; ++i) d[i] = at(i, i);
        return d;
    }

    double max_abs() const {
        double s = 0.0;
        for (double v : values_) s = std::max(s, std::abs(v));
        return s;
    }

    // max |a_ij - a_ji| over stored entries
    double symmetry_defect() const {
        double d = 0.0;
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                d = std::max(d, std::abs(values_[k] - at(col_idx_[k], i)));
        return d;
    }

    bool is_symmetric(double rel_tol = 1e-12) const {
        const double scale = max_abs();
        return symmetry_defect() <= rel_tol * (scale > 0.0 ? scale : 1.0);
    }

    DenseMatrix to_dense() const {
        DenseMatrix m(dim_, dim_);
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                m(i, col_idx_[k]) = values_[k];
        return m;
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

// y_i = sum_j A_ij x_j, accumulation in row-traversal order
inline std::vector<double> spmv(const SparseCsrMatrix& a, const std::vector<double>& x) {
    if (x.size() != a.dim()) throw ValidationError("spmv: dimension mismatch");
    std::vector<double> y(a.dim(), 0.0);
    const auto& rp = a.row_ptr();
    const auto& ci = a.col_idx();
    const auto& v = a.values();
    for (std::size_t i = 0; i < a.dim(); ++i) {
        double s = 0.0;
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += v[k] * x[ci[k]];
        y[i] = s;
    }
    return y;
}

// Y = A * X for dense X, column blocks handled row-wise
inline DenseMatrix spmm(const SparseCsrMatrix& a, const DenseMatrix& x) {
    if (x.rows() != a.dim()) throw ValidationError("spmm: dimension mismatch");
    DenseMatrix y(a.dim(), x.cols(), 0.0);
    const auto& rp = a.row_ptr();
    const auto& ci = a.col_idx();
    const auto& v = a.values();
    for (std::size_t i = 0; i < a.dim(); ++i) {
        double* yi = y.row(i);
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
            const double aik = v[k];
            const double* xr = x.row(ci[k]);
            for (std::size_t j = 0; j < x.cols(); ++j) yi[j] += aik * xr[j];
        }
    }
    return y;
}

// --- Matrix Market coordinate format ---------------------------------------

inline void save_matrix_market(const SparseCsrMatrix& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    // lower triangle only; matrix must be symmetric
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
            if (a.col_idx()[k] <= i) ++count;
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << a.dim() << ' ' << a.dim() << ' ' << count << '\n';
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
            if (a.col_idx()[k] <= i)
                out << (i + 1) << ' ' << (a.col_idx()[k] + 1) << ' '
                    << format_double(a.values()[k]) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

inline SparseCsrMatrix load_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for read: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file: " + path);
    const bool symmetric = line.find("symmetric") != std::string::npos;
    if (line.rfind("%%MatrixMarket", 0) != 0 || line.find("coordinate") == std::string::npos)
        throw IoError("unsupported MatrixMarket header in " + path);
    do {
        if (!std::getline(in, line)) throw IoError("missing size line: " + path);
    } while (!line.empty() && line[0] == '%');
    std::istringstream hdr(line);
    std::size_t rows = 0, cols = 0, nnz = 0;
    hdr >> rows >> cols >> nnz;
    if (rows != cols) throw IoError("matrix is not square: " + path);
    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    trip.reserve(symmetric ? 2 * nnz : nnz);
    for (std::size_t k = 0; k < nnz; ++k) {
        std::size_t i = 0, j = 0;
        double v = 0.0;
        in >> i >> j >> v;
        if (!in) throw IoError("truncated entries: " + path);
        trip.emplace_back(i - 1, j - 1, v);
        if (symmetric && i != j) trip.emplace_back(j - 1, i - 1, v);
    }
    return SparseCsrMatrix::from_triplets(rows, std::move(trip));
}

} // namespace nlsp
