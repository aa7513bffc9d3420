#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nlsp/dense.hpp"
#include "nlsp/errors.hpp"

namespace nlsp {

// Modified Gram-Schmidt with a second elimination pass, recorded so the
// reverse pass can replay it. Intermediate columns are reconstructed from the
// stored coefficients during the backward walk instead of being kept, which
// bounds memory at O(nk + k^2).
struct MgsTrace {
    std::size_t n = 0;
    std::size_t k = 0;
    DenseMatrix q;                        // result, n x k
    std::vector<double> norms;            // pivot norms, length k
    std::vector<std::vector<double>> coeff; // per column: 2j coefficients in
                                            // elimination order
};

inline MgsTrace orthonormalize_differentiable(const DenseMatrix& p_raw) {
    const std::size_t n = p_raw.rows();
    const std::size_t k = p_raw.cols();
    if (n < k) throw ValidationError("orthonormalize: requires rows >= cols");

    MgsTrace t;
    t.n = n;
    t.k = k;
    t.q = DenseMatrix(n, k);
    t.norms.resize(k);
    t.coeff.resize(k);

    std::vector<double> v(n);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < n; ++i) v[i] = p_raw(i, j);
        t.coeff[j].reserve(2 * j);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < j; ++p) {
                double c = 0.0;
                for (std::size_t i = 0; i < n; ++i) c += t.q(i, p) * v[i];
                for (std::size_t i = 0; i < n; ++i) v[i] -= c * t.q(i, p);
                t.coeff[j].push_back(c);
            }
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) nrm += v[i] * v[i];
        nrm = std::sqrt(nrm);
        if (nrm < 1e-10)
            throw RankDeficiencyError("orthonormalize: column " + std::to_string(j) +
                                      " vanished after elimination");
        t.norms[j] = nrm;
        for (std::size_t i = 0; i < n; ++i) t.q(i, j) = v[i] / nrm;
    }
    return t;
}

// Reverse pass: given dL/dQ, produce dL/dP_raw by walking the recorded
// elimination sequence backwards. Projections are re-inflated using
// v_old = v_new + c * q_p.
inline DenseMatrix orthonormalize_backward(const MgsTrace& t, const DenseMatrix& q_grad) {
    const std::size_t n = t.n;
    const std::size_t k = t.k;
    if (q_grad.rows() != n || q_grad.cols() != k)
        throw ValidationError("orthonormalize_backward: gradient shape mismatch");

    DenseMatrix p_grad(n, k, 0.0);
    // accumulated adjoints of the q columns; later columns feed earlier ones
    DenseMatrix q_bar = q_grad;

    std::vector<double> v(n), v_bar(n);
    for (std::size_t jj = k; jj-- > 0;) {
        const std::size_t j = jj;
        // invert the normalization: q_j = v / r
        const double r = t.norms[j];
        double qdot = 0.0;
        for (std::size_t i = 0; i < n; ++i) qdot += t.q(i, j) * q_bar(i, j);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = t.q(i, j) * r; // post-elimination column
            v_bar[i] = (q_bar(i, j) - t.q(i, j) * qdot) / r;
        }
        // walk eliminations backwards (second pass first)
        const auto& cs = t.coeff[j];
        for (std::size_t step = cs.size(); step-- > 0;) {
            const std::size_t p = step % j;
            const double c = cs[step];
            // recover the pre-elimination column
            for (std::size_t i = 0; i < n; ++i) v[i] += c * t.q(i, p);
            double vb_dot_q = 0.0;
            for (std::size_t i = 0; i < n; ++i) vb_dot_q += v_bar[i] * t.q(i, p);
            // dL/dq_p += -(v_bar . q_p) v_old - c v_bar
            for (std::size_t i = 0; i < n; ++i)
                q_bar(i, p) += -vb_dot_q * v[i] - c * v_bar[i];
            // dL/dv_old = v_bar - (v_bar . q_p) q_p
            for (std::size_t i = 0; i < n; ++i) v_bar[i] -= vb_dot_q * t.q(i, p);
        }
        for (std::size_t i = 0; i < n; ++i) p_grad(i, j) = v_bar[i];
    }
    return p_grad;
}

} // namespace nlsp
