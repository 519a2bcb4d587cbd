#pragma once

#include <cstddef>
#include <stdexcept>

#include "drf/tensor.hpp"

namespace drf {

struct LossConfig {
    double lambda0 = 1.0;  // data term weight
    double lambda1 = 1e-7; // range-penalty weight
};

/// R(I) = sum max(I - 1, 0) + sum max(-I, 0): total mass outside [0, 1].
/// Accumulated in double.
template <typename T>
double range_penalty(const T* I, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = static_cast<double>(I[i]);
        if (v > 1.0) acc += v - 1.0;
        if (v < 0.0) acc += -v;
    }
    return acc;
}

/// lambda0 * sum |gt - pred| + lambda1 * R(pred), both sums unnormalized.
template <typename T>
double total_loss(const T* gt, const T* pred, std::size_t n, const LossConfig& cfg) {
    double l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(gt[i]) - static_cast<double>(pred[i]);
        l1 += d < 0.0 ? -d : d;
    }
    return cfg.lambda0 * l1 + cfg.lambda1 * range_penalty(pred, n);
}

/// total_loss plus its gradient with respect to pred (subgradient 0 at the
/// kinks). Returns the loss; dpred is overwritten.
template <typename T>
double total_loss_grad(const T* gt, const T* pred, std::size_t n, const LossConfig& cfg,
                       T* dpred) {
    double l1 = 0.0, pen = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = static_cast<double>(gt[i]);
        const double p = static_cast<double>(pred[i]);
        const double d = g - p;
        l1 += d < 0.0 ? -d : d;
        double grad = cfg.lambda0 * (p > g ? 1.0 : (p < g ? -1.0 : 0.0));
        if (p > 1.0) {
            pen += p - 1.0;
            grad += cfg.lambda1;
        } else if (p < 0.0) {
            pen += -p;
            grad -= cfg.lambda1;
        }
        dpred[i] = static_cast<T>(grad);
    }
    return cfg.lambda0 * l1 + cfg.lambda1 * pen;
}

inline double range_penalty(const Tensor& I) { return range_penalty(I.data(), I.size()); }

inline double total_loss(const Tensor& gt, const Tensor& pred, const LossConfig& cfg) {
    if (!gt.same_shape(pred))
        throw std::invalid_argument("total_loss: shape mismatch");
    return total_loss(gt.data(), pred.data(), gt.size(), cfg);
}

} // namespace drf
