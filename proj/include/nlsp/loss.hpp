#pragma once

#include <string>
#include <vector>

#include "nlsp/dense.hpp"
#include "nlsp/errors.hpp"
#include "nlsp/svd.hpp"

namespace nlsp {

enum class LossKind { Nlss, Subspace };

inline std::string loss_name(LossKind k) {
    return k == LossKind::Nlss ? "NLSS" : "Subspace";
}

struct LossValue {
    double loss = 0.0;
    DenseMatrix grad; // d loss / d P, n x k
};

namespace detail {

inline void check_loss_inputs(const DenseMatrix& s, const DenseMatrix& p, double ortho_tol) {
    if (p.rows() != s.rows()) throw ValidationError("loss: row mismatch between S and P");
    if (orthonormality_defect(p) > ortho_tol)
        throw ValidationError("loss: basis not orthonormal");
}

// loss = 1 - sum_j w_j e_j / (norm * ||S||^2), grad = -2/(norm ||S||^2) S (S^T P) W.
// Accumulation order matches captured_energy so that for uniform weights
// 1 - loss reproduces it bit for bit.
inline LossValue weighted_rayleigh_loss(const DenseMatrix& s, const DenseMatrix& p,
                                        const std::vector<double>& weights, double norm,
                                        double ortho_tol) {
    check_loss_inputs(s, p, ortho_tol);
    const double ssq = sum_squares(s);
    if (ssq <= 0.0) throw ValidationError("loss: zero vector set");
    const double denom = norm * ssq;

    DenseMatrix proj = matmul_tn(s, p); // m x k
    const auto e = column_squared_norms(proj);
    double captured = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) captured += weights[j] * e[j];

    LossValue out;
    out.loss = 1.0 - captured / denom;
    DenseMatrix proj_w = proj; // scale column j by w_j
    for (std::size_t i = 0; i < proj_w.rows(); ++i)
        for (std::size_t j = 0; j < proj_w.cols(); ++j) proj_w(i, j) *= weights[j];
    out.grad = matmul(s, proj_w);
    const double scale = -2.0 / denom;
    for (std::size_t i = 0; i < out.grad.rows(); ++i)
        for (std::size_t j = 0; j < out.grad.cols(); ++j) out.grad(i, j) *= scale;
    return out;
}

} // namespace detail

// Nested subspace loss: mean over leading-prefix reconstruction gaps,
// equivalently Rayleigh terms weighted w_j = k - j + 1. Ordering-aware -- the
// minimizer pins column j to the j-th left singular vector.
inline LossValue nlss_loss(const DenseMatrix& s, const DenseMatrix& p_tilde,
                           double ortho_tol = 1e-8) {
    const std::size_t k = p_tilde.cols();
    std::vector<double> w(k);
    for (std::size_t j = 0; j < k; ++j) w[j] = static_cast<double>(k - j);
    return detail::weighted_rayleigh_loss(s, p_tilde, w, static_cast<double>(k), ortho_tol);
}

// Plain reconstruction loss, invariant to any orthogonal mix of the columns.
inline LossValue subspace_loss(const DenseMatrix& s, const DenseMatrix& p_tilde,
                               double ortho_tol = 1e-8) {
    std::vector<double> w(p_tilde.cols(), 1.0);
    return detail::weighted_rayleigh_loss(s, p_tilde, w, 1.0, ortho_tol);
}

inline LossValue evaluate_loss(LossKind kind, const DenseMatrix& s, const DenseMatrix& p_tilde,
                               double ortho_tol = 1e-8) {
    return kind == LossKind::Nlss ? nlss_loss(s, p_tilde, ortho_tol)
                                  : subspace_loss(s, p_tilde, ortho_tol);
}

} // namespace nlsp
