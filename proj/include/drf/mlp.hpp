#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "drf/parallel.hpp"
#include "drf/rng.hpp"

namespace drf {

enum class Activation { Sine, Relu };

/// Coordinate network: in_width -> hidden... -> 1, with the configured
/// activation after every hidden layer and a plain linear head. Sine layers
/// compute sin(omega * z) where omega is omega0 on the first layer and 1 on
/// the rest.
struct MlpConfig {
    std::size_t in_width = 64;
    std::vector<std::size_t> hidden = {32, 32, 32};
    Activation activation = Activation::Sine;
    double omega0 = 30.0;
};

template <typename T>
class Mlp {
public:
    explicit Mlp(MlpConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.in_width == 0 || cfg_.hidden.empty())
            throw std::invalid_argument("Mlp: empty layer configuration");
        widths_.push_back(cfg_.in_width);
        for (std::size_t h : cfg_.hidden) {
            if (h == 0) throw std::invalid_argument("Mlp: zero-width hidden layer");
            widths_.push_back(h);
        }
        widths_.push_back(1);
        std::size_t count = 0;
        for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
            offsets_.push_back(count);
            count += widths_[l] * widths_[l + 1] + widths_[l + 1];
        }
        theta.assign(count, T(0));
    }

    const MlpConfig& config() const { return cfg_; }
    std::size_t param_count() const { return theta.size(); }
    std::size_t layer_count() const { return widths_.size() - 1; }
    std::size_t in_width() const { return cfg_.in_width; }

    /// Parameter layout: per layer, weights [out x in] row-major, then biases.
    const T* weights(std::size_t layer) const { return theta.data() + offsets_[layer]; }
    const T* biases(std::size_t layer) const {
        return theta.data() + offsets_[layer] + widths_[layer] * widths_[layer + 1];
    }

    /// Deterministic initialization from the stream. Sine networks use the
    /// established sinusoidal-network scheme: first layer U(-1/f, 1/f) with
    /// f = fan_in, later layers U(-sqrt(6/f)/omega0, +sqrt(6/f)/omega0);
    /// biases follow their layer's weight range. Relu networks use He-uniform
    /// weights U(-sqrt(6/f), +sqrt(6/f)) and zero biases.
    void init(RngStream rng) {
        for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
            const std::size_t fan_in = widths_[l], fan_out = widths_[l + 1];
            double bound;
            bool bias_uniform = true;
            if (cfg_.activation == Activation::Sine) {
                bound = l == 0 ? 1.0 / static_cast<double>(fan_in)
                               : std::sqrt(6.0 / static_cast<double>(fan_in)) / cfg_.omega0;
            } else {
                bound = std::sqrt(6.0 / static_cast<double>(fan_in));
                bias_uniform = false;
            }
            T* w = theta.data() + offsets_[l];
            for (std::size_t i = 0; i < fan_in * fan_out; ++i)
                w[i] = static_cast<T>(rng.uniform(-bound, bound));
            T* b = w + fan_in * fan_out;
            for (std::size_t i = 0; i < fan_out; ++i)
                b[i] = bias_uniform ? static_cast<T>(rng.uniform(-bound, bound)) : T(0);
        }
    }

    /// Batched forward pass: X is [n x in_width] row-major, y receives n
    /// scalars. Rows are independent and evaluated in parallel.
    void forward(const T* X, std::size_t n, T* y) const {
        parallel_for(n, [&](std::size_t r) {
            std::vector<T> a(X + r * cfg_.in_width, X + (r + 1) * cfg_.in_width);
            std::vector<T> z;
            for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
                affine(l, a, z);
                if (l + 2 < widths_.size()) activate(l, z);
                a.swap(z);
            }
            y[r] = a[0];
        });
    }

    /// Forward plus reverse pass. dy holds dL/dy per row; grad (theta layout)
    /// is assigned the full batch gradient. Rows are processed in order with
    /// fixed-order accumulation, so the result is independent of thread
    /// count. If y is non-null the predictions are written as well.
    void forward_backward(const T* X, std::size_t n, const T* dy, std::vector<T>& grad,
                          T* y = nullptr) const {
        grad.assign(theta.size(), T(0));
        const std::size_t layers = layer_count();
        std::vector<std::vector<T>> acts(layers + 1); // post-activation per layer
        std::vector<std::vector<T>> pre(layers);      // pre-activation per layer
        std::vector<T> delta, delta_prev;
        for (std::size_t r = 0; r < n; ++r) {
            acts[0].assign(X + r * cfg_.in_width, X + (r + 1) * cfg_.in_width);
            for (std::size_t l = 0; l < layers; ++l) {
                affine(l, acts[l], pre[l]);
                acts[l + 1] = pre[l];
                if (l + 1 < layers) activate(l, acts[l + 1]);
            }
            if (y) y[r] = acts[layers][0];

            delta.assign(1, dy[r]); // head is linear
            for (std::size_t l = layers; l-- > 0;) {
                T* gw = grad.data() + offsets_[l];
                T* gb = gw + widths_[l] * widths_[l + 1];
                const T* a_in = acts[l].data();
                for (std::size_t o = 0; o < widths_[l + 1]; ++o) {
                    const T d = delta[o];
                    gb[o] += d;
                    T* gw_row = gw + o * widths_[l];
                    for (std::size_t i = 0; i < widths_[l]; ++i) gw_row[i] += d * a_in[i];
                }
                if (l == 0) break;
                const T* w = theta.data() + offsets_[l];
                delta_prev.assign(widths_[l], T(0));
                for (std::size_t o = 0; o < widths_[l + 1]; ++o) {
                    const T d = delta[o];
                    const T* w_row = w + o * widths_[l];
                    for (std::size_t i = 0; i < widths_[l]; ++i)
                        delta_prev[i] += d * w_row[i];
                }
                // chain through the activation of layer l-1
                const T omega = layer_omega(l - 1);
                for (std::size_t i = 0; i < widths_[l]; ++i) {
                    const T zv = pre[l - 1][i];
                    if (cfg_.activation == Activation::Sine)
                        delta_prev[i] *= omega * std::cos(omega * zv);
                    else
                        delta_prev[i] *= zv > T(0) ? T(1) : T(0);
                }
                delta.swap(delta_prev);
            }
        }
    }

    std::vector<T> theta;

private:
    T layer_omega(std::size_t layer) const {
        if (cfg_.activation != Activation::Sine) return T(1);
        return layer == 0 ? static_cast<T>(cfg_.omega0) : T(1);
    }

    void affine(std::size_t l, const std::vector<T>& in, std::vector<T>& out) const {
        const T* w = theta.data() + offsets_[l];
        const T* b = w + widths_[l] * widths_[l + 1];
        out.assign(widths_[l + 1], T(0));
        for (std::size_t o = 0; o < widths_[l + 1]; ++o) {
            T acc = b[o];
            const T* w_row = w + o * widths_[l];
            for (std::size_t i = 0; i < widths_[l]; ++i) acc += w_row[i] * in[i];
            out[o] = acc;
        }
    }

    void activate(std::size_t l, std::vector<T>& z) const {
        const T omega = layer_omega(l);
        for (T& v : z)
            v = cfg_.activation == Activation::Sine ? std::sin(omega * v)
                                                    : (v > T(0) ? v : T(0));
    }

    MlpConfig cfg_;
    std::vector<std::size_t> widths_;
    std::vector<std::size_t> offsets_;
};

} // namespace drf
