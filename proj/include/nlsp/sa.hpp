#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "nlsp/dense.hpp"
#include "nlsp/errors.hpp"
#include "nlsp/sparse.hpp"

namespace nlsp {

// Greedy strength-based aggregation: |a_ij| >= theta sqrt(a_ii a_jj) defines
// the strong graph. Pass 1 seeds aggregates around nodes whose strong
// neighbourhood is untouched, pass 2 attaches leftovers to the strongest
// neighbouring aggregate, pass 3 groups whatever remains; nodes with no
// strong neighbours end up as singleton aggregates.
inline std::vector<std::size_t> aggregate_nodes(const SparseCsrMatrix& a, double theta,
                                                std::size_t* num_aggregates_out = nullptr) {
    const std::size_t n = a.dim();
    const auto diag = a.diagonal();
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);

    std::vector<std::vector<std::size_t>> strong(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
            const std::size_t j = a.col_idx()[k];
            if (j == i) continue;
            if (std::abs(a.values()[k]) >= theta * std::sqrt(std::abs(diag[i] * diag[j])))
                strong[i].push_back(j);
        }

    std::vector<std::size_t> agg(n, kUnset);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (agg[i] != kUnset || strong[i].empty()) continue;
        bool touched = false;
        for (std::size_t j : strong[i])
            if (agg[j] != kUnset) {
                touched = true;
                break;
            }
        if (touched) continue;
        agg[i] = next;
        for (std::size_t j : strong[i]) agg[j] = next;
        ++next;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (agg[i] != kUnset) continue;
        double best = -1.0;
        std::size_t best_agg = kUnset;
        for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
            const std::size_t j = a.col_idx()[k];
            if (j == i || agg[j] == kUnset) continue;
            bool is_strong = false;
            for (std::size_t sj : strong[i])
                if (sj == j) {
                    is_strong = true;
                    break;
                }
            if (!is_strong) continue;
            if (std::abs(a.values()[k]) > best) {
                best = std::abs(a.values()[k]);
                best_agg = agg[j];
            }
        }
        if (best_agg != kUnset) agg[i] = best_agg;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (agg[i] != kUnset) continue;
        agg[i] = next;
        for (std::size_t j : strong[i])
            if (agg[j] == kUnset) agg[j] = next;
        ++next;
    }
    if (num_aggregates_out) *num_aggregates_out = next;
    return agg;
}

// P = (I - omega D^-1 A) T with T the normalized aggregate indicator matrix.
// Returned dense at n x n_c; the coarse dimension is emergent.
inline DenseMatrix sa_prolongator(const SparseCsrMatrix& a, double theta = 0.25,
                                  double omega = 0.66) {
    const std::size_t n = a.dim();
    std::size_t nc = 0;
    const auto agg = aggregate_nodes(a, theta, &nc);
    if (nc == 0) throw NumericError("sa_prolongator: no aggregates formed");

    std::vector<std::size_t> size(nc, 0);
    for (std::size_t i = 0; i < n; ++i) ++size[agg[i]];

    DenseMatrix t(n, nc, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        t(i, agg[i]) = 1.0 / std::sqrt(static_cast<double>(size[agg[i]]));

    const auto diag = a.diagonal();
    DenseMatrix p = t;
    for (std::size_t i = 0; i < n; ++i) {
        if (diag[i] <= 0.0) throw NumericError("sa_prolongator: non-positive diagonal");
        const double w = omega / diag[i];
        for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
            const std::size_t j = a.col_idx()[k];
            const double scaled = w * a.values()[k];
            const std::size_t col = agg[j];
            p(i, col) -= scaled * t(j, col);
        }
    }
    return p;
}

} // namespace nlsp
