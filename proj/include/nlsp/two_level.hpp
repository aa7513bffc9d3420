#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nlsp/cholesky.hpp"
#include "nlsp/dense.hpp"
#include "nlsp/errors.hpp"
#include "nlsp/qr.hpp"
#include "nlsp/smoothing.hpp"
#include "nlsp/sparse.hpp"

namespace nlsp {

// One two-grid cycle from a zero initial guess: nu1 Jacobi sweeps, exact
// coarse solve in span(U_r) through the Galerkin operator U_r^T A U_r, a
// prolongated correction, nu2 Jacobi sweeps. Linear in the right-hand side,
// so it serves as a fixed preconditioner inside PCG.
class TwoLevelPreconditioner {
public:
    TwoLevelPreconditioner(const SparseCsrMatrix& a, const DenseMatrix& basis_any, double omega,
                           std::size_t nu1, std::size_t nu2)
        : smoother_(a, omega), nu1_(nu1), nu2_(nu2) {
        if (basis_any.cols() == 0) throw ValidationError("two-level: empty coarse space");
        if (basis_any.rows() != a.dim())
            throw ValidationError("two-level: basis row count must match matrix dimension");
        // incoming bases may be non-orthonormal (the SA prolongator is not)
        basis_ = qr_thin(basis_any).q;

        const std::size_t nc = basis_.cols();
        DenseMatrix coarse(nc, nc);
        std::vector<double> col(a.dim());
        for (std::size_t j = 0; j < nc; ++j) {
            for (std::size_t i = 0; i < a.dim(); ++i) col[i] = basis_(i, j);
            const auto acol = spmv(a, col);
            for (std::size_t i = 0; i < nc; ++i) {
                double s = 0.0;
                for (std::size_t row = 0; row < a.dim(); ++row) s += basis_(row, i) * acol[row];
                coarse(i, j) = s;
            }
        }
        // exact symmetrization before factorizing; failure marks a broken basis
        for (std::size_t i = 0; i < nc; ++i)
            for (std::size_t j = i + 1; j < nc; ++j) {
                const double v = 0.5 * (coarse(i, j) + coarse(j, i));
                coarse(i, j) = v;
                coarse(j, i) = v;
            }
        coarse_ = std::make_unique<CholeskyFactor>(coarse);
    }

    const DenseMatrix& basis() const { return basis_; }
    std::size_t coarse_dim() const { return basis_.cols(); }
    std::size_t nu1() const { return nu1_; }
    std::size_t nu2() const { return nu2_; }

    std::vector<double> apply(const SparseCsrMatrix& a, const std::vector<double>& rhs) const {
        if (rhs.size() != a.dim()) throw ValidationError("two-level apply: dimension mismatch");
        std::vector<double> z(a.dim(), 0.0);
        for (std::size_t s = 0; s < nu1_; ++s) smoother_.sweep(a, z, rhs);

        const auto az = spmv(a, z);
        std::vector<double> residual(a.dim());
        for (std::size_t i = 0; i < a.dim(); ++i) residual[i] = rhs[i] - az[i];
        // coarse correction: z += U_r (U_r^T A U_r)^-1 U_r^T r
        std::vector<double> coarse_rhs(coarse_dim(), 0.0);
        for (std::size_t i = 0; i < a.dim(); ++i)
            for (std::size_t j = 0; j < coarse_dim(); ++j)
                coarse_rhs[j] += basis_(i, j) * residual[i];
        const auto coarse_err = coarse_->solve(coarse_rhs);
        for (std::size_t i = 0; i < a.dim(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < coarse_dim(); ++j) s += basis_(i, j) * coarse_err[j];
            z[i] += s;
        }
        for (std::size_t s = 0; s < nu2_; ++s) smoother_.sweep(a, z, rhs);
        return z;
    }

private:
    DenseMatrix basis_;
    std::unique_ptr<CholeskyFactor> coarse_;
    JacobiSmoother smoother_;
    std::size_t nu1_ = 0;
    std::size_t nu2_ = 0;
};

inline TwoLevelPreconditioner build_preconditioner(const SparseCsrMatrix& a,
                                                   const DenseMatrix& basis, double omega,
                                                   std::size_t nu1, std::size_t nu2) {
    return TwoLevelPreconditioner(a, basis, omega, nu1, nu2);
}

inline std::vector<double> apply_two_level(const TwoLevelPreconditioner& m,
                                           const SparseCsrMatrix& a,
                                           const std::vector<double>& rhs) {
    return m.apply(a, rhs);
}

struct IdentityPreconditioner {
    std::vector<double> apply(const SparseCsrMatrix&, const std::vector<double>& r) const {
        return r;
    }
};

struct JacobiPreconditioner {
    std::vector<double> apply(const SparseCsrMatrix& a, const std::vector<double>& r) const {
        const auto d = a.diagonal();
        std::vector<double> z(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (d[i] <= 0.0) throw NumericError("jacobi preconditioner: non-positive diagonal");
            z[i] = r[i] / d[i];
        }
        return z;
    }
};

struct SolveReport {
    std::size_t iterations = 0;
    std::vector<double> residual_history; // ||r_k||_2 / ||b||_2 per iteration
    bool converged = false;
    double true_relative_residual = 0.0; // recomputed from scratch at exit
    double inference_ms = 0.0;
    double setup_ms = 0.0;
    double solve_ms = 0.0;
    double total_ms = 0.0;
    std::string method;
    std::size_t coarse_dim = 0;
};

struct PcgResult {
    std::vector<double> solution;
    SolveReport report;
};

// Standard preconditioned conjugate gradients; stops when the recurrence
// residual satisfies ||r||/||b|| < delta.
template <class Preconditioner>
PcgResult pcg(const SparseCsrMatrix& a, const std::vector<double>& b,
              const Preconditioner& m, double delta, std::size_t max_iters) {
    if (b.size() != a.dim()) throw ValidationError("pcg: dimension mismatch");
    double b_norm = 0.0;
    for (double v : b) b_norm += v * v;
    b_norm = std::sqrt(b_norm);
    if (b_norm == 0.0) throw ValidationError("pcg: zero right-hand side");

    PcgResult out;
    out.solution.assign(a.dim(), 0.0);
    std::vector<double> r = b;
    std::vector<double> z = m.apply(a, r);
    std::vector<double> p = z;
    double rz = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) rz += r[i] * z[i];

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        const auto ap = spmv(a, p);
        double pap = 0.0;
        for (std::size_t i = 0; i < a.dim(); ++i) pap += p[i] * ap[i];
        if (pap <= 0.0) throw NotSpdError("pcg: p^T A p <= 0, operator not SPD");
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < a.dim(); ++i) {
            out.solution[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        double r_norm = 0.0;
        for (double v : r) r_norm += v * v;
        r_norm = std::sqrt(r_norm);
        out.report.residual_history.push_back(r_norm / b_norm);
        out.report.iterations = iter + 1;
        if (r_norm / b_norm < delta) {
            out.report.converged = true;
            break;
        }
        z = m.apply(a, r);
        double rz_next = 0.0;
        for (std::size_t i = 0; i < a.dim(); ++i) rz_next += r[i] * z[i];
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < a.dim(); ++i) p[i] = z[i] + beta * p[i];
    }

    const auto ax = spmv(a, out.solution);
    double true_res = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        true_res += (b[i] - ax[i]) * (b[i] - ax[i]);
    out.report.true_relative_residual = std::sqrt(true_res) / b_norm;
    return out;
}

} // namespace nlsp
