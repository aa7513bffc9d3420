#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "nlsp/dense.hpp"
#include "nlsp/errors.hpp"
#include "nlsp/loss.hpp"
#include "nlsp/orthonormalize.hpp"
#include "nlsp/rng.hpp"

namespace nlsp {

struct StiefelResult {
    DenseMatrix basis; // n x k orthonormal
    double loss = 0.0;
    double final_grad_norm = 0.0; // Riemannian gradient at exit
    std::size_t steps_used = 0;
    bool converged = false;
};

namespace detail {

// leading eigenvalue of S S^T, a few power iterations suffice for a step scale
inline double top_squared_singular_value(const DenseMatrix& s, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x706f7765));
    std::vector<double> v(s.cols());
    for (auto& x : v) x = rng.normal();
    double lambda = 0.0;
    for (int it = 0; it < 60; ++it) {
        // w = S^T (S v)
        std::vector<double> sv(s.rows(), 0.0);
        for (std::size_t i = 0; i < s.rows(); ++i)
            for (std::size_t j = 0; j < s.cols(); ++j) sv[i] += s(i, j) * v[j];
        std::vector<double> w(s.cols(), 0.0);
        for (std::size_t i = 0; i < s.rows(); ++i)
            for (std::size_t j = 0; j < s.cols(); ++j) w[j] += s(i, j) * sv[i];
        double nrm = 0.0;
        for (double x : w) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        lambda = nrm;
        for (std::size_t j = 0; j < s.cols(); ++j) v[j] = w[j] / nrm;
    }
    return lambda; // ||S^T S v|| -> sigma_1^2
}

} // namespace detail

// Projected gradient descent for the nested loss directly on the Stiefel
// manifold, Gram-Schmidt retraction after each step. Network-free harness for
// the optimality guarantees of the loss.
inline StiefelResult stiefel_minimize(const DenseMatrix& s, std::size_t k, std::size_t steps,
                                      double step_size = 0.9, std::uint64_t seed = 0,
                                      double grad_rel_tol = 1e-10) {
    if (k == 0 || k > s.rows()) throw ValidationError("stiefel_minimize: bad rank");

    const double ssq = sum_squares(s);
    if (ssq <= 0.0) throw ValidationError("stiefel_minimize: zero matrix");
    const double sigma1_sq = detail::top_squared_singular_value(s, seed);
    // gradient Lipschitz constant of the objective is 2 sigma_1^2 / ||S||_F^2
    const double lipschitz = 2.0 * sigma1_sq / ssq;
    const double eta = step_size / (lipschitz > 0.0 ? lipschitz : 1.0);
    // natural magnitude of the full gradient, used for the relative stop rule
    const double grad_scale = 2.0 * sigma1_sq * std::sqrt(static_cast<double>(k)) /
                              (static_cast<double>(k) * ssq);

    Rng rng(mix_seed(seed, 0x73746965));
    StiefelResult out;
    out.basis = orthonormalize_differentiable(randn_matrix(s.rows(), k, rng)).q;

    for (std::size_t step = 0; step < steps; ++step) {
        auto lv = nlss_loss(s, out.basis);
        out.loss = lv.loss;
        // Riemannian gradient: G - P sym(P^T G)
        DenseMatrix ptg = matmul_tn(out.basis, lv.grad);
        DenseMatrix sym(k, k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) sym(i, j) = 0.5 * (ptg(i, j) + ptg(j, i));
        DenseMatrix riem = matmul(out.basis, sym);
        for (std::size_t i = 0; i < riem.rows(); ++i)
            for (std::size_t j = 0; j < riem.cols(); ++j)
                riem(i, j) = lv.grad(i, j) - riem(i, j);
        out.final_grad_norm = frobenius_norm(riem);
        out.steps_used = step;
        if (out.final_grad_norm <= grad_rel_tol * grad_scale) {
            out.converged = true;
            return out;
        }
        DenseMatrix moved = out.basis;
        for (std::size_t i = 0; i < moved.rows(); ++i)
            for (std::size_t j = 0; j < moved.cols(); ++j) moved(i, j) -= eta * riem(i, j);
        out.basis = orthonormalize_differentiable(moved).q;
    }
    auto lv = nlss_loss(s, out.basis);
    out.loss = lv.loss;
    out.steps_used = steps;
    return out;
}

} // namespace nlsp
