#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "nlsp/dense.hpp"
#include "nlsp/errors.hpp"
#include "nlsp/rng.hpp"

namespace nlsp {

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * (1.0 / std::numbers::sqrt2))); }

inline double gelu_grad(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * (1.0 / std::numbers::sqrt2)));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + x * pdf;
}

inline constexpr double kLayerNormEps = 1e-5;

namespace detail {

// reduction with four accumulators so -O2/-O3 can keep the lanes independent
inline double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

} // namespace detail

// Fully connected net: hidden layers run Linear -> LayerNorm(gain, offset) ->
// GELU, the output layer is a plain Linear. All parameters live in one flat
// buffer so the optimizer, checkpoints and finite-difference checks can treat
// them uniformly.
class MlpModel {
public:
    MlpModel() = default;

    MlpModel(std::vector<std::size_t> widths, std::uint64_t seed) : widths_(std::move(widths)) {
        if (widths_.size() < 2) throw ValidationError("mlp: need at least input and output widths");
        std::size_t total = 0;
        offsets_.clear();
        for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
            const std::size_t fan_in = widths_[l];
            const std::size_t fan_out = widths_[l + 1];
            LayerOffsets off;
            off.w = total;
            total += fan_in * fan_out;
            off.b = total;
            total += fan_out;
            if (l + 2 < widths_.size()) { // hidden layers carry a LayerNorm
                off.gain = total;
                total += fan_out;
                off.offset = total;
                total += fan_out;
            }
            offsets_.push_back(off);
        }
        params_.assign(total, 0.0);
        Rng rng(mix_seed(seed, 0x6d6c70));
        for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
            const std::size_t fan_in = widths_[l];
            const std::size_t fan_out = widths_[l + 1];
            const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
            for (std::size_t i = 0; i < fan_in * fan_out; ++i)
                params_[offsets_[l].w + i] = rng.normal(0.0, sd);
            if (l + 2 < widths_.size())
                for (std::size_t i = 0; i < fan_out; ++i) params_[offsets_[l].gain + i] = 1.0;
        }
        adam_m_.assign(total, 0.0);
        adam_v_.assign(total, 0.0);
    }

    const std::vector<std::size_t>& widths() const { return widths_; }
    std::size_t input_width() const { return widths_.front(); }
    std::size_t output_width() const { return widths_.back(); }
    std::size_t num_layers() const { return widths_.size() - 1; }
    std::size_t num_params() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    bool all_finite() const {
        for (double v : params_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    struct Trace {
        std::vector<std::vector<double>> inputs;     // activation entering each layer
        std::vector<std::vector<double>> pre_norm;   // z = W x + b
        std::vector<std::vector<double>> normalized; // x_hat before gain/offset
        std::vector<std::vector<double>> pre_act;    // after gain/offset
        std::vector<double> inv_std;                 // per hidden layer
    };

    std::vector<double> forward(const std::vector<double>& input, Trace* trace = nullptr) const {
        if (input.size() != input_width()) throw ValidationError("mlp forward: width mismatch");
        std::vector<double> a = input;
        if (trace) {
            trace->inputs.clear();
            trace->pre_norm.clear();
            trace->normalized.clear();
            trace->pre_act.clear();
            trace->inv_std.clear();
        }
        for (std::size_t l = 0; l < num_layers(); ++l) {
            const std::size_t fan_in = widths_[l];
            const std::size_t fan_out = widths_[l + 1];
            const double* w = params_.data() + offsets_[l].w;
            const double* b = params_.data() + offsets_[l].b;
            if (trace) trace->inputs.push_back(a);
            std::vector<double> z(fan_out);
            for (std::size_t i = 0; i < fan_out; ++i)
                z[i] = b[i] + detail::dot(w + i * fan_in, a.data(), fan_in);
            if (l + 1 == num_layers()) {
                a = std::move(z);
                break;
            }
            // LayerNorm over features
            double mean = 0.0;
            for (double v : z) mean += v;
            mean /= static_cast<double>(fan_out);
            double var = 0.0;
            for (double v : z) var += (v - mean) * (v - mean);
            var /= static_cast<double>(fan_out);
            const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
            const double* gain = params_.data() + offsets_[l].gain;
            const double* offset = params_.data() + offsets_[l].offset;
            std::vector<double> x_hat(fan_out), y(fan_out), act(fan_out);
            for (std::size_t i = 0; i < fan_out; ++i) {
                x_hat[i] = (z[i] - mean) * inv_std;
                y[i] = gain[i] * x_hat[i] + offset[i];
                act[i] = gelu(y[i]);
            }
            if (trace) {
                trace->pre_norm.push_back(std::move(z));
                trace->normalized.push_back(x_hat);
                trace->pre_act.push_back(y);
                trace->inv_std.push_back(inv_std);
            }
            a = std::move(act);
        }
        return a;
    }

    // Reverse pass; returns d loss / d params. Input gradient is discarded
    // because training never differentiates through S.
    std::vector<double> backward(const Trace& trace, const std::vector<double>& out_grad) const {
        std::vector<double> grads;
        backward_into(trace, out_grad, grads);
        return grads;
    }

    // Buffer-reusing variant for the training loop. Every parameter slot is
    // written exactly once per call, so no zero fill is needed.
    void backward_into(const Trace& trace, const std::vector<double>& out_grad,
                       std::vector<double>& grads) const {
        if (out_grad.size() != output_width())
            throw ValidationError("mlp backward: gradient width mismatch");
        grads.resize(params_.size());
        std::vector<double> g = out_grad;
        for (std::size_t l = num_layers(); l-- > 0;) {
            const std::size_t fan_in = widths_[l];
            const std::size_t fan_out = widths_[l + 1];
            const bool hidden = (l + 1 < num_layers());
            if (hidden) {
                const std::size_t hl = l; // hidden index equals layer index
                const auto& y = trace.pre_act[hl];
                const auto& x_hat = trace.normalized[hl];
                const double inv_std = trace.inv_std[hl];
                const double* gain = params_.data() + offsets_[l].gain;
                // through GELU
                for (std::size_t i = 0; i < fan_out; ++i) g[i] *= gelu_grad(y[i]);
                // through gain/offset
                double* ggain = grads.data() + offsets_[l].gain;
                double* goffset = grads.data() + offsets_[l].offset;
                std::vector<double> gx_hat(fan_out);
                for (std::size_t i = 0; i < fan_out; ++i) {
                    ggain[i] = g[i] * x_hat[i];
                    goffset[i] = g[i];
                    gx_hat[i] = g[i] * gain[i];
                }
                // through normalization
                double mean_g = 0.0, mean_gx = 0.0;
                for (std::size_t i = 0; i < fan_out; ++i) {
                    mean_g += gx_hat[i];
                    mean_gx += gx_hat[i] * x_hat[i];
                }
                mean_g /= static_cast<double>(fan_out);
                mean_gx /= static_cast<double>(fan_out);
                for (std::size_t i = 0; i < fan_out; ++i)
                    g[i] = (gx_hat[i] - mean_g - x_hat[i] * mean_gx) * inv_std;
            }
            const auto& x = trace.inputs[l];
            const double* w = params_.data() + offsets_[l].w;
            double* gw = grads.data() + offsets_[l].w;
            double* gb = grads.data() + offsets_[l].b;
            std::vector<double> gx(fan_in, 0.0);
            for (std::size_t i = 0; i < fan_out; ++i) {
                const double gi = g[i];
                gb[i] = gi;
                double* gwi = gw + i * fan_in;
                for (std::size_t j = 0; j < fan_in; ++j) gwi[j] = gi * x[j];
                if (gi != 0.0) detail::axpy(gi, w + i * fan_in, gx.data(), fan_in);
            }
            g = std::move(gx);
        }
    }

    // m_hat / (sqrt(v_hat) + eps) folded so each parameter costs one sqrt and
    // one division
    void adam_step(const std::vector<double>& grads, double lr, double beta1 = 0.9,
                   double beta2 = 0.999, double eps = 1e-8) {
        if (grads.size() != params_.size()) throw ValidationError("adam: gradient size mismatch");
        ++adam_t_;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t_));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t_));
        const double sqrt_bc2 = std::sqrt(bc2);
        const double step = lr * sqrt_bc2 / bc1;
        const double eps_scaled = eps * sqrt_bc2;
        double* m = adam_m_.data();
        double* v = adam_v_.data();
        double* p = params_.data();
        const double* g = grads.data();
        const std::size_t count = params_.size();
        for (std::size_t i = 0; i < count; ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            p[i] -= step * m[i] / (std::sqrt(v[i]) + eps_scaled);
        }
    }

    std::uint64_t adam_steps() const { return adam_t_; }

    // --- checkpoint -------------------------------------------------------
    // magic, version, widths, parameter blob, optimizer state, manifest text

    void save(const std::string& path, const std::string& manifest) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open for write: " + path);
        const char magic[8] = {'N', 'L', 'S', 'P', 'C', 'K', 'P', '1'};
        out.write(magic, 8);
        auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
        put_u64(widths_.size());
        for (std::size_t w : widths_) put_u64(w);
        put_u64(params_.size());
        out.write(reinterpret_cast<const char*>(params_.data()),
                  static_cast<std::streamsize>(8 * params_.size()));
        out.write(reinterpret_cast<const char*>(adam_m_.data()),
                  static_cast<std::streamsize>(8 * adam_m_.size()));
        out.write(reinterpret_cast<const char*>(adam_v_.data()),
                  static_cast<std::streamsize>(8 * adam_v_.size()));
        put_u64(adam_t_);
        put_u64(manifest.size());
        out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
        if (!out) throw IoError("write failed: " + path);
    }

    static MlpModel load(const std::string& path, std::string* manifest = nullptr) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open for read: " + path);
        char magic[8];
        in.read(magic, 8);
        if (!in || std::string(magic, 8) != "NLSPCKP1")
            throw IoError("bad checkpoint magic: " + path);
        auto get_u64 = [&]() {
            std::uint64_t v = 0;
            in.read(reinterpret_cast<char*>(&v), 8);
            return v;
        };
        const std::size_t nw = get_u64();
        std::vector<std::size_t> widths(nw);
        for (auto& w : widths) w = get_u64();
        MlpModel m(widths, 0);
        const std::size_t np = get_u64();
        if (np != m.params_.size()) throw IoError("checkpoint parameter count mismatch: " + path);
        in.read(reinterpret_cast<char*>(m.params_.data()), static_cast<std::streamsize>(8 * np));
        in.read(reinterpret_cast<char*>(m.adam_m_.data()), static_cast<std::streamsize>(8 * np));
        in.read(reinterpret_cast<char*>(m.adam_v_.data()), static_cast<std::streamsize>(8 * np));
        m.adam_t_ = get_u64();
        const std::size_t mlen = get_u64();
        std::string text(mlen, '\0');
        in.read(text.data(), static_cast<std::streamsize>(mlen));
        if (!in) throw IoError("truncated checkpoint: " + path);
        if (manifest) *manifest = std::move(text);
        return m;
    }

private:
    struct LayerOffsets {
        std::size_t w = 0;
        std::size_t b = 0;
        std::size_t gain = 0;
        std::size_t offset = 0;
    };

    std::vector<std::size_t> widths_;
    std::vector<LayerOffsets> offsets_;
    std::vector<double> params_;
    std::vector<double> adam_m_;
    std::vector<double> adam_v_;
    std::uint64_t adam_t_ = 0;
};

} // namespace nlsp
