#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ofm/errors.hpp"
#include "ofm/lab/rng.hpp"

namespace ofm::lab {

enum class LossKind { mse, cross_entropy };

struct DenseLayer {
    int in_dim = 0;
    int out_dim = 0;
    std::vector<double> w; // out_dim x in_dim, row-major
    std::vector<double> b; // out_dim
};

/// A stack of dense layers with elementwise tanh after the layers flagged in
/// `tanh_after`. Forward and backward are analytic and fully deterministic
/// given weights and input order.
struct TinyNet {
    std::vector<DenseLayer> layers;
    std::vector<std::uint8_t> tanh_after;

    int input_dim() const { return layers.front().in_dim; }
    int output_dim() const { return layers.back().out_dim; }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.w.size() + l.b.size();
        return n;
    }

    double& param_at(std::size_t flat) {
        for (auto& l : layers) {
            if (flat < l.w.size()) return l.w[flat];
            flat -= l.w.size();
            if (flat < l.b.size()) return l.b[flat];
            flat -= l.b.size();
        }
        throw error("param index out of range");
    }
};

inline TinyNet make_net(const std::vector<int>& sizes,
                        const std::vector<std::uint8_t>& tanh_after, Rng& rng,
                        double init_scale = 1.0) {
    TinyNet net;
    net.tanh_after = tanh_after;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        DenseLayer layer;
        layer.in_dim = sizes[l];
        layer.out_dim = sizes[l + 1];
        layer.w.resize(static_cast<std::size_t>(layer.in_dim) * layer.out_dim);
        layer.b.assign(static_cast<std::size_t>(layer.out_dim), 0.0);
        const double s = init_scale / std::sqrt(static_cast<double>(layer.in_dim));
        for (auto& w : layer.w) w = rng.uniform(-s, s);
        net.layers.push_back(std::move(layer));
    }
    if (net.tanh_after.size() != net.layers.size())
        throw error("tanh_after size mismatch");
    return net;
}

/// Per-layer activations of one forward pass; a[0] is the input.
struct Activations {
    std::vector<std::vector<double>> a;
};

inline const std::vector<double>& forward(const TinyNet& net, const double* x,
                                          Activations& acts) {
    acts.a.resize(net.layers.size() + 1);
    acts.a[0].assign(x, x + net.input_dim());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        auto& out = acts.a[l + 1];
        out.assign(static_cast<std::size_t>(layer.out_dim), 0.0);
        const auto& in = acts.a[l];
        for (int o = 0; o < layer.out_dim; ++o) {
            double z = layer.b[static_cast<std::size_t>(o)];
            const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * layer.in_dim;
            for (int i = 0; i < layer.in_dim; ++i) z += wrow[i] * in[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(o)] = net.tanh_after[l] ? std::tanh(z) : z;
        }
    }
    return acts.a.back();
}

/// Gradient buffers mirroring a net's layers.
struct Grads {
    std::vector<std::vector<double>> dw, db;

    void reset(const TinyNet& net) {
        dw.resize(net.layers.size());
        db.resize(net.layers.size());
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            dw[l].assign(net.layers[l].w.size(), 0.0);
            db[l].assign(net.layers[l].b.size(), 0.0);
        }
    }

    double at(const TinyNet& net, std::size_t flat) const {
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            if (flat < dw[l].size()) return dw[l][flat];
            flat -= dw[l].size();
            if (flat < db[l].size()) return db[l][flat];
            flat -= db[l].size();
        }
        throw error("grad index out of range");
    }
};

/// Accumulates parameter gradients for one sample given dL/d(output);
/// optionally writes dL/d(input) for chaining through an upstream net.
inline void backward(const TinyNet& net, const Activations& acts,
                     std::vector<double> d_out, Grads& grads,
                     std::vector<double>* d_input = nullptr) {
    for (std::size_t l = net.layers.size(); l-- > 0;) {
        const auto& layer = net.layers[l];
        const auto& out = acts.a[l + 1];
        const auto& in = acts.a[l];
        if (net.tanh_after[l])
            for (int o = 0; o < layer.out_dim; ++o)
                d_out[static_cast<std::size_t>(o)] *=
                    1.0 - out[static_cast<std::size_t>(o)] * out[static_cast<std::size_t>(o)];
        auto& dw = grads.dw[l];
        auto& db = grads.db[l];
        std::vector<double> d_in(static_cast<std::size_t>(layer.in_dim), 0.0);
        for (int o = 0; o < layer.out_dim; ++o) {
            const double g = d_out[static_cast<std::size_t>(o)];
            db[static_cast<std::size_t>(o)] += g;
            double* dwrow = dw.data() + static_cast<std::size_t>(o) * layer.in_dim;
            const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * layer.in_dim;
            for (int i = 0; i < layer.in_dim; ++i) {
                dwrow[i] += g * in[static_cast<std::size_t>(i)];
                d_in[static_cast<std::size_t>(i)] += g * wrow[i];
            }
        }
        d_out = std::move(d_in);
    }
    if (d_input) *d_input = std::move(d_out);
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

/// Mean squared error over output dims. Returns the loss and fills dL/dout.
inline double mse_loss(const std::vector<double>& out, const double* target,
                       std::vector<double>& d_out) {
    const auto d = out.size();
    d_out.resize(d);
    double loss = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double e = out[i] - target[i];
        loss += e * e;
        d_out[i] = 2.0 * e / static_cast<double>(d);
    }
    return loss / static_cast<double>(d);
}

inline std::vector<double> softmax(const std::vector<double>& logits) {
    std::vector<double> p(logits.size());
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

/// Softmax cross-entropy against an integer label. Returns the loss and
/// fills dL/dlogits = p - onehot.
inline double cross_entropy_loss(const std::vector<double>& logits, int label,
                                 std::vector<double>& d_out) {
    const auto p = softmax(logits);
    d_out = p;
    d_out[static_cast<std::size_t>(label)] -= 1.0;
    const double pl = std::max(p[static_cast<std::size_t>(label)], 1e-300);
    return -std::log(pl);
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

/// Adam with the usual defaults (1e-3, 0.9, 0.999, 1e-8).
struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    std::vector<std::vector<double>> mw, vw, mb, vb;
    std::int64_t t = 0;

    void reset(const TinyNet& net) {
        mw.resize(net.layers.size());
        vw.resize(net.layers.size());
        mb.resize(net.layers.size());
        vb.resize(net.layers.size());
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            mw[l].assign(net.layers[l].w.size(), 0.0);
            vw[l].assign(net.layers[l].w.size(), 0.0);
            mb[l].assign(net.layers[l].b.size(), 0.0);
            vb[l].assign(net.layers[l].b.size(), 0.0);
        }
        t = 0;
    }

    void step(TinyNet& net, const Grads& grads, double inv_batch) {
        ++t;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            auto& layer = net.layers[l];
            for (std::size_t i = 0; i < layer.w.size(); ++i) {
                const double g = grads.dw[l][i] * inv_batch;
                mw[l][i] = beta1 * mw[l][i] + (1.0 - beta1) * g;
                vw[l][i] = beta2 * vw[l][i] + (1.0 - beta2) * g * g;
                layer.w[i] -= lr * (mw[l][i] / c1) / (std::sqrt(vw[l][i] / c2) + eps);
            }
            for (std::size_t i = 0; i < layer.b.size(); ++i) {
                const double g = grads.db[l][i] * inv_batch;
                mb[l][i] = beta1 * mb[l][i] + (1.0 - beta1) * g;
                vb[l][i] = beta2 * vb[l][i] + (1.0 - beta2) * g * g;
                layer.b[i] -= lr * (mb[l][i] / c1) / (std::sqrt(vb[l][i] / c2) + eps);
            }
        }
    }
};

} // namespace ofm::lab
