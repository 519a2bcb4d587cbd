#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace drf {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// In-place iterative radix-2 FFT. Unnormalized forward; the inverse divides
/// by the length. Length must be a power of two.
inline void fft_1d(std::complex<double>* a, std::size_t n, bool inverse) {
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_1d: length must be a power of two");
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) a[i] *= scale;
    }
}

/// Row-major 2D FFT over an h x w grid (both powers of two).
inline void fft_2d(std::vector<std::complex<double>>& grid, std::size_t h,
                   std::size_t w, bool inverse) {
    if (grid.size() != h * w)
        throw std::invalid_argument("fft_2d: grid size mismatch");
    for (std::size_t r = 0; r < h; ++r) fft_1d(grid.data() + r * w, w, inverse);
    std::vector<std::complex<double>> col(h);
    for (std::size_t c = 0; c < w; ++c) {
        for (std::size_t r = 0; r < h; ++r) col[r] = grid[r * w + c];
        fft_1d(col.data(), h, inverse);
        for (std::size_t r = 0; r < h; ++r) grid[r * w + c] = col[r];
    }
}

/// Full linear (acyclic) 2D convolution of a (ah x aw) with b (bh x bw),
/// output (ah+bh-1) x (aw+bw-1). Operands are zero-padded to a power-of-two
/// grid covering the full support, so no circular wrap-around occurs. The
/// transform runs in double regardless of T; only the result is narrowed.
template <typename T>
std::vector<T> conv_full_2d(const T* a, std::size_t ah, std::size_t aw,
                            const T* b, std::size_t bh, std::size_t bw) {
    if (ah == 0 || aw == 0 || bh == 0 || bw == 0)
        throw std::invalid_argument("conv_full_2d: empty operand");
    const std::size_t oh = ah + bh - 1, ow = aw + bw - 1;
    const std::size_t H = next_pow2(oh), W = next_pow2(ow);

    std::vector<std::complex<double>> fa(H * W), fb(H * W);
    for (std::size_t r = 0; r < ah; ++r)
        for (std::size_t c = 0; c < aw; ++c)
            fa[r * W + c] = static_cast<double>(a[r * aw + c]);
    for (std::size_t r = 0; r < bh; ++r)
        for (std::size_t c = 0; c < bw; ++c)
            fb[r * W + c] = static_cast<double>(b[r * bw + c]);

    fft_2d(fa, H, W, false);
    fft_2d(fb, H, W, false);
    for (std::size_t i = 0; i < H * W; ++i) fa[i] *= fb[i];
    fft_2d(fa, H, W, true);

    std::vector<T> out(oh * ow);
    for (std::size_t r = 0; r < oh; ++r)
        for (std::size_t c = 0; c < ow; ++c)
            out[r * ow + c] = static_cast<T>(fa[r * W + c].real());
    return out;
}

/// Gradient of a full convolution with respect to its first operand: the
/// valid correlation of the output-gradient g (gh x gw) with the kernel
/// b (bh x bw), returning (gh-bh+1) x (gw-bw+1).
template <typename T>
std::vector<T> conv_full_2d_adjoint(const T* g, std::size_t gh, std::size_t gw,
                                    const T* b, std::size_t bh, std::size_t bw) {
    if (gh < bh || gw < bw)
        throw std::invalid_argument("conv_full_2d_adjoint: gradient smaller than kernel");
    std::vector<T> flipped(bh * bw);
    for (std::size_t r = 0; r < bh; ++r)
        for (std::size_t c = 0; c < bw; ++c)
            flipped[r * bw + c] = b[(bh - 1 - r) * bw + (bw - 1 - c)];
    const std::vector<T> full = conv_full_2d(g, gh, gw, flipped.data(), bh, bw);
    const std::size_t oh = gh - bh + 1, ow = gw - bw + 1;
    const std::size_t fw = gw + bw - 1;
    std::vector<T> out(oh * ow);
    for (std::size_t r = 0; r < oh; ++r)
        for (std::size_t c = 0; c < ow; ++c)
            out[r * ow + c] = full[(r + bh - 1) * fw + (c + bw - 1)];
    return out;
}

} // namespace drf
