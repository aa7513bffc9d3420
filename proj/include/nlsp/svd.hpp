#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "nlsp/dense.hpp"
#include "nlsp/errors.hpp"

namespace nlsp {

struct EighResult {
    std::vector<double> eigenvalues; // nonincreasing
    DenseMatrix eigenvectors;        // columns, matching order
    int sweeps_used = 0;
};

// Cyclic two-sided Jacobi eigensolver for a symmetric matrix. Converged when
// the off-diagonal Frobenius norm drops below rel_tol * ||A||_F.
inline EighResult jacobi_eigh(DenseMatrix a, int max_sweeps = 30, double rel_tol = 1e-12) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw ValidationError("jacobi_eigh: matrix not square");
    DenseMatrix v = DenseMatrix::identity(n);
    const double total = frobenius_norm(a);

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    int sweeps = 0;
    while (off_norm() > rel_tol * total && total > 0.0) {
        if (sweeps >= max_sweeps)
            throw ConvergenceError("jacobi_eigh: no convergence after " +
                                   std::to_string(sweeps) + " sweeps");
        ++sweeps;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const double apj = a(p, j), aqj = a(q, j);
                    a(p, j) = c * apj - s * aqj;
                    a(q, j) = s * apj + c * aqj;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    EighResult out;
    out.sweeps_used = sweeps;
    out.eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.eigenvalues[i] = a(i, i);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return out.eigenvalues[x] > out.eigenvalues[y];
    });
    std::vector<double> ev(n);
    DenseMatrix vv(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        ev[j] = out.eigenvalues[order[j]];
        for (std::size_t i = 0; i < n; ++i) vv(i, j) = v(i, order[j]);
    }
    out.eigenvalues = std::move(ev);
    out.eigenvectors = std::move(vv);
    return out;
}

struct SvdResult {
    DenseMatrix left_vectors;           // n x r orthonormal
    std::vector<double> singular_values; // nonincreasing, length r = min(n, m)
    DenseMatrix right_vectors;          // m x r orthonormal
    int sweeps_used = 0;
};

namespace detail {

// Extends the first `have` orthonormal columns of u to all r columns, picking
// coordinate vectors with the largest residual against the current span.
inline void complete_orthonormal(DenseMatrix& u, std::size_t have) {
    const std::size_t n = u.rows();
    const std::size_t r = u.cols();
    std::vector<double> v(n);
    for (std::size_t j = have; j < r; ++j) {
        bool placed = false;
        for (std::size_t cand = 0; cand < n && !placed; ++cand) {
            for (std::size_t i = 0; i < n; ++i) v[i] = (i == cand) ? 1.0 : 0.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t p = 0; p < j; ++p) {
                    double c = 0.0;
                    for (std::size_t i = 0; i < n; ++i) c += u(i, p) * v[i];
                    for (std::size_t i = 0; i < n; ++i) v[i] -= c * u(i, p);
                }
            }
            double nrm = 0.0;
            for (std::size_t i = 0; i < n; ++i) nrm += v[i] * v[i];
            nrm = std::sqrt(nrm);
            if (nrm > 0.5) {
                for (std::size_t i = 0; i < n; ++i) u(i, j) = v[i] / nrm;
                placed = true;
            }
        }
        if (!placed) throw NumericError("complete_orthonormal: no candidate found");
    }
}

// one extra Gram-Schmidt polish keeps U^T U = I at 1e-10 even when singular
// values cluster
inline void reorthonormalize_columns(DenseMatrix& u) {
    const std::size_t n = u.rows();
    const std::size_t r = u.cols();
    std::vector<double> v(n);
    for (std::size_t j = 0; j < r; ++j) {
        for (std::size_t i = 0; i < n; ++i) v[i] = u(i, j);
        for (std::size_t p = 0; p < j; ++p) {
            double c = 0.0;
            for (std::size_t i = 0; i < n; ++i) c += u(i, p) * v[i];
            for (std::size_t i = 0; i < n; ++i) v[i] -= c * u(i, p);
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) nrm += v[i] * v[i];
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) throw NumericError("reorthonormalize: zero column");
        for (std::size_t i = 0; i < n; ++i) u(i, j) = v[i] / nrm;
    }
}

} // namespace detail

// Thin SVD through a symmetric eigensolve of the Gram matrix of the smaller
// dimension. Sign convention: the largest-magnitude entry of each left vector
// is made nonnegative (first such entry on ties), flipping the paired right
// vector along with it.
inline SvdResult svd_oracle(const DenseMatrix& s) {
    if (!s.all_finite()) throw ValidationError("svd_oracle: non-finite entries");
    const std::size_t n = s.rows();
    const std::size_t m = s.cols();
    const std::size_t r = std::min(n, m);
    if (r == 0) throw ValidationError("svd_oracle: empty matrix");

    const bool gram_right = (m <= n); // eigensolve S^T S rather than S S^T
    DenseMatrix gram = gram_right ? matmul_tn(s, s) : [&] {
        DenseMatrix st = transpose(s);
        return matmul_tn(st, st);
    }();
    EighResult eig = jacobi_eigh(std::move(gram));

    SvdResult out;
    out.sweeps_used = eig.sweeps_used;
    out.singular_values.resize(r);
    // eigenvalues of the Gram matrix below its rounding floor are numerical
    // zeros; clamping keeps exact-rank-deficient inputs exactly deficient
    const double lam_floor = (eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues[0]) * 64.0 *
                             std::numeric_limits<double>::epsilon();
    for (std::size_t i = 0; i < r; ++i) {
        const double lam = eig.eigenvalues[i] <= lam_floor ? 0.0 : eig.eigenvalues[i];
        out.singular_values[i] = std::sqrt(std::max(0.0, lam));
    }

    DenseMatrix small(gram_right ? m : n, r);
    for (std::size_t i = 0; i < small.rows(); ++i)
        for (std::size_t j = 0; j < r; ++j) small(i, j) = eig.eigenvectors(i, j);

    // recover the other factor, filling the numerically-null part with an
    // orthonormal complement
    const double sig_max = out.singular_values.empty() ? 0.0 : out.singular_values[0];
    const double cutoff = sig_max * 1e-13;
    DenseMatrix big(gram_right ? n : m, r);
    std::size_t solid = 0;
    for (std::size_t j = 0; j < r; ++j) {
        if (out.singular_values[j] <= cutoff) break;
        for (std::size_t i = 0; i < big.rows(); ++i) {
            double acc = 0.0;
            if (gram_right)
                for (std::size_t k = 0; k < m; ++k) acc += s(i, k) * small(k, j);
            else
                for (std::size_t k = 0; k < n; ++k) acc += s(k, i) * small(k, j);
            big(i, j) = acc / out.singular_values[j];
        }
        solid = j + 1;
    }
    detail::complete_orthonormal(big, solid);
    if (orthonormality_defect(big) > 1e-11) detail::reorthonormalize_columns(big);

    out.left_vectors = gram_right ? std::move(big) : std::move(small);
    out.right_vectors = gram_right ? std::move(small) : std::move(big);

    for (std::size_t j = 0; j < r; ++j) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < out.left_vectors.rows(); ++i) {
            const double mag = std::abs(out.left_vectors(i, j));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (out.left_vectors(arg, j) < 0.0) {
            for (std::size_t i = 0; i < out.left_vectors.rows(); ++i)
                out.left_vectors(i, j) = -out.left_vectors(i, j);
            for (std::size_t i = 0; i < out.right_vectors.rows(); ++i)
                out.right_vectors(i, j) = -out.right_vectors(i, j);
        }
    }
    return out;
}

inline DenseMatrix svd_reconstruct(const SvdResult& f) {
    const std::size_t n = f.left_vectors.rows();
    const std::size_t m = f.right_vectors.rows();
    const std::size_t r = f.singular_values.size();
    DenseMatrix s(n, m, 0.0);
    for (std::size_t k = 0; k < r; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            const double us = f.left_vectors(i, k) * f.singular_values[k];
            if (us == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) s(i, j) += us * f.right_vectors(j, k);
        }
    return s;
}

// ||P^T S||_F^2 / ||S||_F^2 for an orthonormal P. The fraction of the
// vector-set energy lying in span(P). Written as the double complement so it
// is bit-identical to 1 - subspace loss, which shares this kernel.
inline double captured_energy(const DenseMatrix& p, const DenseMatrix& s,
                              double ortho_tol = 1e-8) {
    if (p.rows() != s.rows()) throw ValidationError("captured_energy: row mismatch");
    if (orthonormality_defect(p) > ortho_tol)
        throw ValidationError("captured_energy: basis not orthonormal");
    const double ssq = sum_squares(s);
    if (ssq <= 0.0) throw ValidationError("captured_energy: zero vector set");
    DenseMatrix proj = matmul_tn(s, p);
    const auto e = column_squared_norms(proj);
    double captured = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) captured += 1.0 * e[j];
    return 1.0 - (1.0 - captured / (1.0 * ssq));
}

// Principal angles (radians, nondecreasing) between the column spans of two
// orthonormal bases of equal rank.
inline std::vector<double> principal_angles(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("principal_angles: shape mismatch");
    DenseMatrix g = matmul_tn(a, b);
    SvdResult f = svd_oracle(g);
    std::vector<double> angles(f.singular_values.size());
    for (std::size_t i = 0; i < angles.size(); ++i)
        angles[i] = std::acos(std::clamp(f.singular_values[i], 0.0, 1.0));
    std::sort(angles.begin(), angles.end());
    return angles;
}

} // namespace nlsp
