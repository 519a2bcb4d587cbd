#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "drf/errors.hpp"

namespace drf {

struct AdamConfig {
    double base_lr = 0.001;
    std::size_t total_epochs = 800; // horizon of the linear decay
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 1.0; // global gradient-norm ceiling; <= 0 disables
};

/// Linear decay: lr(epoch) = base_lr * (1 - epoch / total_epochs), floored
/// at zero.
inline double lr_at(const AdamConfig& cfg, std::size_t epoch) {
    if (cfg.total_epochs == 0) return cfg.base_lr;
    const double f = 1.0 - static_cast<double>(epoch) / static_cast<double>(cfg.total_epochs);
    return cfg.base_lr * (f > 0.0 ? f : 0.0);
}

template <typename T>
struct AdamState {
    std::vector<T> m, v;
    std::size_t step = 0;
    explicit AdamState(std::size_t n) : m(n, T(0)), v(n, T(0)) {}
};

/// One bias-corrected Adam update at the given epoch's learning rate. The
/// gradient is first scaled to the global-norm ceiling (norm computed in
/// double). Throws NumericError("diverged") on a non-finite gradient.
template <typename T>
void adam_step(AdamState<T>& st, const AdamConfig& cfg, std::vector<T>& theta,
               const std::vector<T>& grad, std::size_t epoch) {
    if (theta.size() != grad.size() || theta.size() != st.m.size())
        throw std::invalid_argument("adam_step: parameter/gradient shape mismatch");

    double norm_sq = 0.0;
    for (const T& g : grad) norm_sq += static_cast<double>(g) * static_cast<double>(g);
    if (!std::isfinite(norm_sq))
        throw NumericError("diverged: non-finite gradient at step " +
                           std::to_string(st.step + 1));
    const double norm = std::sqrt(norm_sq);
    const double scale =
        (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) ? cfg.clip_norm / norm : 1.0;

    ++st.step;
    const double t = static_cast<double>(st.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    const double lr = lr_at(cfg, epoch);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = static_cast<double>(grad[i]) * scale;
        const double m = cfg.beta1 * static_cast<double>(st.m[i]) + (1.0 - cfg.beta1) * g;
        const double v = cfg.beta2 * static_cast<double>(st.v[i]) + (1.0 - cfg.beta2) * g * g;
        st.m[i] = static_cast<T>(m);
        st.v[i] = static_cast<T>(v);
        const double update = lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
        theta[i] = static_cast<T>(static_cast<double>(theta[i]) - update);
    }
}

} // namespace drf
