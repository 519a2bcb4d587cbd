#pragma once

#include <algorithm>
#include <cstddef>
#include <numbers>

#include "drf/rng.hpp"

namespace drf {

/// Input scalars in fixed order: (x, y, u, v, s, t), all normalized to [-1,1].
inline constexpr std::size_t kCoordCount = 6;

/// Sinusoidal feature lift. With encode=false the six raw coordinates pass
/// through unchanged (the baseline network's input).
struct EncoderConfig {
    bool encode = true;
    std::size_t levels_display = 1; // (x, y)
    std::size_t levels_angular = 5; // (u, v)
    std::size_t levels_spatial = 10; // (s, t)
};

inline std::size_t encoded_width(const EncoderConfig& cfg) {
    if (!cfg.encode) return kCoordCount;
    // two scalars per group, (sin, cos) per level
    return 4 * (cfg.levels_display + cfg.levels_angular + cfg.levels_spatial);
}

/// Per scalar p and level l in [0, L): (sin(2^l pi p), cos(2^l pi p)).
/// Output order: group-major (display, angular, spatial), scalar-major within
/// a group, level-major within a scalar. out must hold encoded_width values.
template <typename T>
void positional_encode(const EncoderConfig& cfg, const T* coords, T* out) {
    if (!cfg.encode) {
        std::copy(coords, coords + kCoordCount, out);
        return;
    }
    const std::size_t levels[3] = {cfg.levels_display, cfg.levels_angular,
                                   cfg.levels_spatial};
    std::size_t k = 0;
    for (int group = 0; group < 3; ++group)
        for (int scalar = 0; scalar < 2; ++scalar) {
            const T p = coords[2 * group + scalar];
            T freq = static_cast<T>(std::numbers::pi);
            for (std::size_t l = 0; l < levels[group]; ++l) {
                out[k++] = std::sin(freq * p);
                out[k++] = std::cos(freq * p);
                freq *= static_cast<T>(2);
            }
        }
}

/// Gaussian jitter applied to the input coordinates during training, with a
/// separate standard deviation per coordinate group (normalized units).
struct NoiseConfig {
    bool enabled = true;
    double display_std = 5e-3;
    double angular_std = 1e-2;
    double subview_std = 1e-3;
};

template <typename T>
void inject_coordinate_noise(const NoiseConfig& cfg, T* coords, RngStream& rng) {
    if (!cfg.enabled) return;
    const double stds[3] = {cfg.display_std, cfg.angular_std, cfg.subview_std};
    for (int group = 0; group < 3; ++group)
        for (int scalar = 0; scalar < 2; ++scalar)
            coords[2 * group + scalar] +=
                static_cast<T>(rng.normal(0.0, stds[group]));
}

} // namespace drf
