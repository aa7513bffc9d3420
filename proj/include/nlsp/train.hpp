#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nlsp/dense.hpp"
#include "nlsp/errors.hpp"
#include "nlsp/loss.hpp"
#include "nlsp/mlp.hpp"
#include "nlsp/orthonormalize.hpp"
#include "nlsp/rng.hpp"

namespace nlsp {

struct TrainConfig {
    std::size_t rank = 0; // r <= K; 0 means train to full rank K
    std::size_t epochs = 1000;
    double learning_rate = 1e-3;
    std::size_t batch = 1;
    bool permutation_augmentation = true;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::Nlss;
    std::vector<std::size_t> hidden; // empty = pick by problem size
};

// four hidden layers for large grids, a single 128 layer otherwise
inline std::vector<std::size_t> default_hidden_widths(std::size_t n) {
    if (n >= 33 * 33) return {128, 256, 256, 128};
    return {128};
}

inline std::vector<double> flatten_column_major(const DenseMatrix& m) {
    std::vector<double> v(m.rows() * m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) v[j * m.rows() + i] = m(i, j);
    return v;
}

inline DenseMatrix reshape_column_major(const std::vector<double>& v, std::size_t rows,
                                        std::size_t cols) {
    if (v.size() != rows * cols) throw ValidationError("reshape: length mismatch");
    DenseMatrix m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) m(i, j) = v[j * rows + i];
    return m;
}

// Candidate basis for one vector set: normalize by the Frobenius norm, run
// the network, reshape and orthonormalize.
inline DenseMatrix infer_basis(const MlpModel& model, const DenseMatrix& s) {
    const std::size_t n = s.rows();
    const std::size_t r = model.output_width() / n;
    DenseMatrix s_n = s;
    const double fro = frobenius_norm(s);
    if (fro <= 0.0) throw ValidationError("infer_basis: zero vector set");
    for (std::size_t i = 0; i < s_n.rows(); ++i)
        for (std::size_t j = 0; j < s_n.cols(); ++j) s_n(i, j) /= fro;
    auto raw = model.forward(flatten_column_major(s_n));
    return orthonormalize_differentiable(reshape_column_major(raw, n, r)).q;
}

struct TrainResult {
    MlpModel model;
    std::vector<double> epoch_loss; // mean loss per epoch
};

// One instance per step: permute columns (optional), normalize, forward,
// orthonormalize, loss, backprop through Gram-Schmidt and the net, Adam.
inline TrainResult train(const std::vector<DenseMatrix>& vector_sets, TrainConfig cfg) {
    if (vector_sets.empty()) throw ValidationError("train: empty dataset");
    const std::size_t n = vector_sets.front().rows();
    const std::size_t k = vector_sets.front().cols();
    for (const auto& s : vector_sets)
        if (s.rows() != n || s.cols() != k)
            throw ValidationError("train: instances must share n and K");
    if (cfg.rank == 0) cfg.rank = k;
    if (cfg.rank > k) throw ValidationError("train: rank exceeds K");
    if (cfg.learning_rate <= 0.0) throw ValidationError("train: learning rate must be positive");

    std::vector<std::size_t> widths;
    widths.push_back(n * k);
    const auto hidden = cfg.hidden.empty() ? default_hidden_widths(n) : cfg.hidden;
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(n * cfg.rank);

    TrainResult out;
    out.model = MlpModel(widths, mix_seed(cfg.seed, 0x696e6974));
    Rng rng(mix_seed(cfg.seed, 0x74726169));

    MlpModel::Trace trace;
    std::vector<double> param_grads;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_sum = 0.0;
        const auto order = rng.permutation(vector_sets.size());
        for (std::size_t idx : order) {
            DenseMatrix s = vector_sets[idx];
            if (cfg.permutation_augmentation) s = permute_cols(s, rng.permutation(k));
            const double fro = frobenius_norm(s);
            if (fro <= 0.0) throw ValidationError("train: zero vector set");
            for (std::size_t i = 0; i < s.rows(); ++i)
                for (std::size_t j = 0; j < s.cols(); ++j) s(i, j) /= fro;

            auto raw = out.model.forward(flatten_column_major(s), &trace);
            auto mgs = orthonormalize_differentiable(reshape_column_major(raw, n, cfg.rank));
            auto lv = evaluate_loss(cfg.loss, s, mgs.q);
            if (!std::isfinite(lv.loss))
                throw TrainingDivergedError("train: non-finite loss at epoch " +
                                            std::to_string(epoch));
            epoch_sum += lv.loss;

            auto raw_grad = orthonormalize_backward(mgs, lv.grad);
            out.model.backward_into(trace, flatten_column_major(raw_grad), param_grads);
            out.model.adam_step(param_grads, cfg.learning_rate);
        }
        if (!out.model.all_finite())
            throw TrainingDivergedError("train: non-finite parameters at epoch " +
                                        std::to_string(epoch));
        out.epoch_loss.push_back(epoch_sum / static_cast<double>(vector_sets.size()));
    }
    return out;
}

} // namespace nlsp
