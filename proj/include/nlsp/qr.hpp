#pragma once

#include <cmath>
#include <string>

#include "nlsp/dense.hpp"
#include "nlsp/errors.hpp"

namespace nlsp {

struct QrResult {
    DenseMatrix q; // n x k, orthonormal columns
    DenseMatrix r; // k x k, upper triangular, nonnegative diagonal
};

// Thin QR via modified Gram-Schmidt with a second elimination pass.
// diag(R) >= 0 holds because each pivot is a column norm.
inline QrResult qr_thin(const DenseMatrix& m) {
    const std::size_t n = m.rows();
    const std::size_t k = m.cols();
    if (n < k) throw ValidationError("qr_thin: requires rows >= cols");
    const double scale = frobenius_norm(m);

    QrResult out{DenseMatrix(n, k), DenseMatrix(k, k)};
    std::vector<double> v(n);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < n; ++i) v[i] = m(i, j);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < j; ++p) {
                double c = 0.0;
                for (std::size_t i = 0; i < n; ++i) c += out.q(i, p) * v[i];
                for (std::size_t i = 0; i < n; ++i) v[i] -= c * out.q(i, p);
                out.r(p, j) += c;
            }
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) nrm += v[i] * v[i];
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12 * scale)
            throw RankDeficiencyError("qr_thin: rank-deficient at column " + std::to_string(j));
        out.r(j, j) = nrm;
        for (std::size_t i = 0; i < n; ++i) out.q(i, j) = v[i] / nrm;
    }
    return out;
}

} // namespace nlsp
