#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nlsp/dense.hpp"
#include "nlsp/errors.hpp"

namespace nlsp {

// Dense LL^T factorization, reusable across right-hand sides.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const DenseMatrix& a, double sym_tol = 1e-10) {
        const std::size_t n = a.rows();
        if (a.cols() != n) throw ValidationError("cholesky: matrix not square");
        const double scale = max_abs(a) > 0.0 ? max_abs(a) : 1.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (std::abs(a(i, j) - a(j, i)) > sym_tol * scale)
                    throw NotSpdError("cholesky: matrix not symmetric");

        l_ = DenseMatrix(n, n);
        for (std::size_t j = 0; j < n; ++j) {
            double d = a(j, j);
            for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
            if (d <= 0.0)
                throw NotSpdError("cholesky: non-positive pivot at row " + std::to_string(j));
            l_(j, j) = std::sqrt(d);
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = a(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
                l_(i, j) = s / l_(j, j);
            }
        }
    }

    std::size_t dim() const { return l_.rows(); }

    std::vector<double> solve(const std::vector<double>& rhs) const {
        const std::size_t n = dim();
        if (rhs.size() != n) throw ValidationError("cholesky solve: dimension mismatch");
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = rhs[i];
            for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * y[k];
            y[i] = s / l_(i, i);
        }
        std::vector<double> x(n);
        for (std::size_t ii = n; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= l_(k, ii) * x[k];
            x[ii] = s / l_(ii, ii);
        }
        return x;
    }

private:
    DenseMatrix l_;
};

inline std::vector<double> cholesky_solve(const DenseMatrix& a, const std::vector<double>& rhs) {
    return CholeskyFactor(a).solve(rhs);
}

} // namespace nlsp
