#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nlsp/loss.hpp"
#include "nlsp/mlp.hpp"
#include "nlsp/orthonormalize.hpp"
#include "nlsp/rng.hpp"
#include "nlsp/train.hpp"

using namespace nlsp;

namespace {

// Straight-line re-implementation of the forward pass, written independently
// of MlpModel::forward. Reads from the same flat parameter layout.
std::vector<double> straight_line_forward(const MlpModel& model,
                                          const std::vector<double>& input) {
    const auto& widths = model.widths();
    const auto& theta = model.params();
    std::size_t cursor = 0;
    std::vector<double> act = input;
    for (std::size_t layer = 0; layer + 1 < widths.size(); ++layer) {
        const std::size_t nin = widths[layer];
        const std::size_t nout = widths[layer + 1];
        std::vector<double> z(nout, 0.0);
        for (std::size_t r = 0; r < nout; ++r) {
            for (std::size_t c = 0; c < nin; ++c) z[r] += theta[cursor + r * nin + c] * act[c];
        }
        cursor += nin * nout;
        for (std::size_t r = 0; r < nout; ++r) z[r] += theta[cursor + r];
        cursor += nout;
        const bool is_last = (layer + 2 == widths.size());
        if (is_last) {
            act = z;
            continue;
        }
        double mu = 0.0;
        for (double v : z) mu += v;
        mu /= static_cast<double>(nout);
        double var = 0.0;
        for (double v : z) var += (v - mu) * (v - mu);
        var /= static_cast<double>(nout);
        std::vector<double> y(nout);
        for (std::size_t r = 0; r < nout; ++r)
            y[r] = theta[cursor + r] * (z[r] - mu) / std::sqrt(var + 1e-5) +
                   theta[cursor + nout + r];
        cursor += 2 * nout;
        for (std::size_t r = 0; r < nout; ++r)
            act[r] = 0.5 * y[r] * (1.0 + std::erf(y[r] / std::sqrt(2.0)));
        act.resize(nout);
        for (std::size_t r = 0; r < nout; ++r)
            act[r] = 0.5 * y[r] * (1.0 + std::erf(y[r] / std::sqrt(2.0)));
    }
    return act;
}

} // namespace

TEST(Mlp, OutputShapeContract) {
    MlpModel m({100 * 4, 16, 100 * 8}, 1);
    std::vector<double> in(400, 0.1);
    auto out = m.forward(in);
    EXPECT_EQ(out.size(), 800u);
    auto p = reshape_column_major(out, 100, 8);
    EXPECT_EQ(p.rows(), 100u);
    EXPECT_EQ(p.cols(), 8u);
}

TEST(Mlp, ZeroWeightsReturnFinalBias) {
    MlpModel m({6, 4, 5}, 3);
    // zero all parameters, then set layer norms to identity and final bias
    for (auto& v : m.params()) v = 0.0;
    // widths 6->4 (hidden): W 24, b 4, gain 4, offset 4; final 4->5: W 20, b 5
    const std::size_t gain_at = 24 + 4;
    for (std::size_t i = 0; i < 4; ++i) m.params()[gain_at + i] = 1.0;
    const std::size_t final_b = 24 + 4 + 4 + 4 + 20;
    for (std::size_t i = 0; i < 5; ++i) m.params()[final_b + i] = 0.5 + static_cast<double>(i);
    auto out = m.forward(std::vector<double>(6, 0.0));
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(out[i], 0.5 + static_cast<double>(i), 1e-12);
}

TEST(Mlp, MatchesStraightLineReimplementation) {
    Rng rng(5);
    MlpModel m({12, 8, 10, 6}, 7);
    for (int t = 0; t < 5; ++t) {
        std::vector<double> in(12);
        for (auto& v : in) v = rng.normal();
        auto a = m.forward(in);
        auto b = straight_line_forward(m, in);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            EXPECT_NEAR(a[i], b[i], 1e-12 * std::max(1.0, std::abs(b[i])));
    }
}

TEST(Mlp, DeterministicGivenParameters) {
    MlpModel m({10, 6, 8}, 9);
    std::vector<double> in(10, 0.3);
    auto a = m.forward(in);
    auto b = m.forward(in);
    EXPECT_EQ(a, b);
}

TEST(Mlp, WidthMismatchRejected) {
    MlpModel m({10, 6, 8}, 9);
    EXPECT_THROW(m.forward(std::vector<double>(9, 0.0)), ValidationError);
}

TEST(Mlp, AdamZeroGradientIsNoOp) {
    MlpModel m({8, 6, 4}, 11);
    auto before = m.params();
    m.adam_step(std::vector<double>(m.num_params(), 0.0), 1e-3);
    EXPECT_EQ(m.params(), before);
    EXPECT_EQ(m.adam_steps(), 1u);
}

TEST(Mlp, CheckpointRoundTripPreservesEverything) {
    Rng rng(13);
    MlpModel m({14, 6, 10}, 15);
    // push some optimizer state
    for (int step = 0; step < 3; ++step) {
        std::vector<double> g(m.num_params());
        for (auto& v : g) v = rng.normal();
        m.adam_step(g, 1e-3);
    }
    const std::string path = ::testing::TempDir() + "nlsp_ckpt_roundtrip.bin";
    m.save(path, "kind = test\nseed = 15\n");
    std::string manifest;
    auto m2 = MlpModel::load(path, &manifest);
    EXPECT_EQ(manifest, "kind = test\nseed = 15\n");
    EXPECT_EQ(m2.widths(), m.widths());
    EXPECT_EQ(m2.params(), m.params());
    EXPECT_EQ(m2.adam_steps(), m.adam_steps());
    std::vector<double> in(14, 0.2);
    EXPECT_EQ(m.forward(in), m2.forward(in));
}

// End-to-end: d loss / d theta via backprop through loss, Gram-Schmidt and
// the net matches central finite differences on a tiny network.
TEST(Mlp, EndToEndParameterGradients) {
    const std::size_t n = 12, k = 4, r = 2;
    Rng rng(17);
    auto s = randn_matrix(n, k, rng);
    const double fro = frobenius_norm(s);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) s(i, j) /= fro;
    const auto s_flat = flatten_column_major(s);

    for (auto kind : {LossKind::Nlss, LossKind::Subspace}) {
        MlpModel model({n * k, 8, n * r}, 19);
        auto loss_of = [&](const MlpModel& m) {
            auto raw = m.forward(s_flat);
            auto q = orthonormalize_differentiable(reshape_column_major(raw, n, r)).q;
            return evaluate_loss(kind, s, q).loss;
        };

        MlpModel::Trace trace;
        auto raw = model.forward(s_flat, &trace);
        auto mgs = orthonormalize_differentiable(reshape_column_major(raw, n, r));
        auto lv = evaluate_loss(kind, s, mgs.q);
        auto raw_grad = orthonormalize_backward(mgs, lv.grad);
        auto analytic = model.backward(trace, flatten_column_major(raw_grad));

        const double eps = 1e-5;
        double worst = 0.0;
        MlpModel probe = model;
        for (std::size_t i = 0; i < model.num_params(); ++i) {
            const double keep = probe.params()[i];
            probe.params()[i] = keep + eps;
            const double fp = loss_of(probe);
            probe.params()[i] = keep - eps;
            const double fm = loss_of(probe);
            probe.params()[i] = keep;
            const double fd = (fp - fm) / (2.0 * eps);
            const double rel =
                std::abs(fd - analytic[i]) / std::max({std::abs(fd), std::abs(analytic[i]), 1e-4});
            worst = std::max(worst, rel);
        }
        EXPECT_LT(worst, 1e-4) << loss_name(kind);
    }
}

TEST(Gelu, GradientMatchesFiniteDifferences) {
    for (double x : {-3.0, -0.7, 0.0, 0.4, 2.2}) {
        const double eps = 1e-6;
        const double fd = (gelu(x + eps) - gelu(x - eps)) / (2.0 * eps);
        EXPECT_NEAR(gelu_grad(x), fd, 1e-8);
    }
}
