// Slow, obviously-correct reference implementations used to cross-check the
// optimized library code. Everything here is written independently of the
// library internals (nested loops, direct formulas) on purpose.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

// Full linear 2D convolution, O(n^4) nested loops.
template <typename T>
std::vector<T> conv_full_direct(const std::vector<T>& a, std::size_t ah, std::size_t aw,
                                const std::vector<T>& b, std::size_t bh, std::size_t bw) {
    const std::size_t oh = ah + bh - 1, ow = aw + bw - 1;
    std::vector<T> out(oh * ow, T(0));
    for (std::size_t i = 0; i < ah; ++i)
        for (std::size_t j = 0; j < aw; ++j)
            for (std::size_t k = 0; k < bh; ++k)
                for (std::size_t l = 0; l < bw; ++l)
                    out[(i + k) * ow + (j + l)] += a[i * aw + j] * b[k * bw + l];
    return out;
}

inline double mse_direct(const std::vector<float>& a, const std::vector<float>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

// Single-scale SSIM with explicit per-window loops (no separable filtering).
inline double ssim_direct(const std::vector<float>& a, const std::vector<float>& b,
                          std::size_t h, std::size_t w) {
    constexpr int win = 11;
    constexpr double sigma = 1.5, K1 = 0.01, K2 = 0.03, L = 1.0;
    const double C1 = (K1 * L) * (K1 * L), C2 = (K2 * L) * (K2 * L);
    double g[win * win];
    double gsum = 0.0;
    for (int y = 0; y < win; ++y)
        for (int x = 0; x < win; ++x) {
            const double dy = y - 5, dx = x - 5;
            g[y * win + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            gsum += g[y * win + x];
        }
    for (double& v : g) v /= gsum;

    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r + win <= h; ++r)
        for (std::size_t c = 0; c + win <= w; ++c) {
            double mu_a = 0, mu_b = 0;
            for (int y = 0; y < win; ++y)
                for (int x = 0; x < win; ++x) {
                    mu_a += g[y * win + x] * a[(r + y) * w + (c + x)];
                    mu_b += g[y * win + x] * b[(r + y) * w + (c + x)];
                }
            double va = 0, vb = 0, cov = 0;
            for (int y = 0; y < win; ++y)
                for (int x = 0; x < win; ++x) {
                    const double da = a[(r + y) * w + (c + x)] - mu_a;
                    const double db = b[(r + y) * w + (c + x)] - mu_b;
                    va += g[y * win + x] * da * da;
                    vb += g[y * win + x] * db * db;
                    cov += g[y * win + x] * da * db;
                }
            total += ((2 * mu_a * mu_b + C1) * (2 * cov + C2)) /
                     ((mu_a * mu_a + mu_b * mu_b + C1) * (va + vb + C2));
            ++count;
        }
    return total / static_cast<double>(count);
}

// Contrast-structure factor alone (no luminance), same windows as ssim_direct.
inline double cs_direct(const std::vector<float>& a, const std::vector<float>& b,
                        std::size_t h, std::size_t w) {
    constexpr int win = 11;
    constexpr double sigma = 1.5, K2 = 0.03;
    const double C2 = K2 * K2;
    double g[win * win];
    double gsum = 0.0;
    for (int y = 0; y < win; ++y)
        for (int x = 0; x < win; ++x) {
            const double dy = y - 5, dx = x - 5;
            g[y * win + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            gsum += g[y * win + x];
        }
    for (double& v : g) v /= gsum;

    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r + win <= h; ++r)
        for (std::size_t c = 0; c + win <= w; ++c) {
            double mu_a = 0, mu_b = 0;
            for (int y = 0; y < win; ++y)
                for (int x = 0; x < win; ++x) {
                    mu_a += g[y * win + x] * a[(r + y) * w + (c + x)];
                    mu_b += g[y * win + x] * b[(r + y) * w + (c + x)];
                }
            double va = 0, vb = 0, cov = 0;
            for (int y = 0; y < win; ++y)
                for (int x = 0; x < win; ++x) {
                    const double da = a[(r + y) * w + (c + x)] - mu_a;
                    const double db = b[(r + y) * w + (c + x)] - mu_b;
                    va += g[y * win + x] * da * da;
                    vb += g[y * win + x] * db * db;
                    cov += g[y * win + x] * da * db;
                }
            total += (2 * cov + C2) / (va + vb + C2);
            ++count;
        }
    return total / static_cast<double>(count);
}

inline std::vector<float> downsample2_direct(const std::vector<float>& img, std::size_t h,
                                             std::size_t w) {
    const std::size_t oh = h / 2, ow = w / 2;
    std::vector<float> out(oh * ow);
    for (std::size_t r = 0; r < oh; ++r)
        for (std::size_t c = 0; c < ow; ++c)
            out[r * ow + c] = 0.25f * (img[2 * r * w + 2 * c] + img[2 * r * w + 2 * c + 1] +
                                       img[(2 * r + 1) * w + 2 * c] +
                                       img[(2 * r + 1) * w + 2 * c + 1]);
    return out;
}

// Step-by-step multi-scale SSIM: cs factors on the finer scales, full SSIM at
// the coarsest, leading weights renormalized, each term clamped to [0, 1].
inline double msssim_direct(std::vector<float> a, std::vector<float> b, std::size_t h,
                            std::size_t w, std::size_t scales) {
    const double weights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    double wsum = 0.0;
    for (std::size_t s = 0; s < scales; ++s) wsum += weights[s];
    double result = 1.0;
    for (std::size_t s = 0; s < scales; ++s) {
        const double raw = (s + 1 == scales) ? ssim_direct(a, b, h, w) : cs_direct(a, b, h, w);
        result *= std::pow(std::clamp(raw, 0.0, 1.0), weights[s] / wsum);
        if (s + 1 < scales) {
            a = downsample2_direct(a, h, w);
            b = downsample2_direct(b, h, w);
            h /= 2;
            w /= 2;
        }
    }
    return result;
}

// Spearman rank correlation with average ranks for ties.
inline double spearman_direct(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    auto ranks = [n](const std::vector<double>& v) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += rx[i]; my += ry[i]; }
    mx /= n; my /= n;
    double num = 0, dx = 0, dy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    return num / std::sqrt(dx * dy);
}

} // namespace oracle
