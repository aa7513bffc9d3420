#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlsp/dense.hpp"
#include "nlsp/errors.hpp"
#include "nlsp/rng.hpp"
#include "nlsp/sparse.hpp"

namespace nlsp {

// Weighted Jacobi: x <- x + omega D^-1 (b - A x)
class JacobiSmoother {
public:
    JacobiSmoother() = default;

    JacobiSmoother(const SparseCsrMatrix& a, double omega) : omega_(omega) {
        if (omega < 0.0 || omega > 1.0)
            throw ValidationError("jacobi: omega must lie in [0, 1]");
        inv_diag_.resize(a.dim());
        const auto d = a.diagonal();
        for (std::size_t i = 0; i < a.dim(); ++i) {
            if (d[i] <= 0.0)
                throw NumericError("jacobi: non-positive diagonal at row " + std::to_string(i));
            inv_diag_[i] = 1.0 / d[i];
        }
    }

    double omega() const { return omega_; }
    const std::vector<double>& inv_diag() const { return inv_diag_; }

    void sweep(const SparseCsrMatrix& a, std::vector<double>& x,
               const std::vector<double>& b) const {
        if (x.size() != a.dim() || b.size() != a.dim())
            throw ValidationError("jacobi sweep: dimension mismatch");
        const auto ax = spmv(a, x);
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] += omega_ * inv_diag_[i] * (b[i] - ax[i]);
    }

    // homogeneous sweep, b = 0
    void sweep(const SparseCsrMatrix& a, std::vector<double>& x) const {
        const auto ax = spmv(a, x);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= omega_ * inv_diag_[i] * ax[i];
    }

    // column-wise over a dense block
    void sweep(const SparseCsrMatrix& a, DenseMatrix& x, const DenseMatrix* b = nullptr) const {
        if (x.rows() != a.dim()) throw ValidationError("jacobi sweep: dimension mismatch");
        const auto ax = spmm(a, x);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double w = omega_ * inv_diag_[i];
            for (std::size_t j = 0; j < x.cols(); ++j) {
                const double rhs = b ? (*b)(i, j) : 0.0;
                x(i, j) += w * (rhs - ax(i, j));
            }
        }
    }

private:
    std::vector<double> inv_diag_;
    double omega_ = 0.66;
};

inline void jacobi_sweep(const JacobiSmoother& smoother, const SparseCsrMatrix& a,
                         std::vector<double>& x, const std::vector<double>& b) {
    smoother.sweep(a, x, b);
}

// K randomly seeded vectors driven toward the near-nullspace by homogeneous
// Jacobi sweeps. Dirichlet rows start at zero and stay exactly zero.
struct SmoothedVectorSet {
    DenseMatrix s; // n x K
    std::size_t sweeps_applied = 0;
    double omega = 0.66;
    std::uint64_t source_seed = 0;
};

inline SmoothedVectorSet generate_smoothed_vectors(const SparseCsrMatrix& a,
                                                   const std::vector<bool>& boundary_mask,
                                                   std::size_t k, std::size_t sweeps,
                                                   double omega, std::uint64_t seed) {
    if (k < 1) throw ValidationError("generate_smoothed_vectors: K must be positive");
    if (boundary_mask.size() != a.dim())
        throw ValidationError("generate_smoothed_vectors: mask size mismatch");
    Rng rng(mix_seed(seed, 0x736d6f6f));
    SmoothedVectorSet out;
    out.sweeps_applied = sweeps;
    out.omega = omega;
    out.source_seed = seed;
    out.s = DenseMatrix(a.dim(), k);
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < k; ++j)
            out.s(i, j) = boundary_mask[i] ? 0.0 : rng.normal();
    JacobiSmoother smoother(a, omega);
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep) smoother.sweep(a, out.s);
    return out;
}

} // namespace nlsp
