#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "drf/angular.hpp"
#include "drf/encoding.hpp"
#include "drf/errors.hpp"
#include "drf/fft.hpp"
#include "drf/loss.hpp"
#include "drf/mlp.hpp"
#include "drf/parallel.hpp"
#include "drf/rng.hpp"

namespace drf {

/// Coordinate rows for one capture: every angular bin center crossed with
/// every tile pixel, in view-tensor order (u, v, s, t). All six scalars are
/// normalized to about [-1, 1]: display position from [0, 1], angles by the
/// total coverage half-angles (degrees), pixel centers by the tile extent.
template <typename T>
std::vector<T> inr_coords(const AngularDomain& dom, std::size_t tile_h,
                          std::size_t tile_w, double display_x, double display_y,
                          double cov_half_u, double cov_half_v) {
    if (tile_h == 0 || tile_w == 0) throw ConfigError("inr_coords: empty tile");
    if (!(cov_half_u > 0.0) || !(cov_half_v > 0.0))
        throw ConfigError("inr_coords: coverage half-angles must be positive");
    const T x = static_cast<T>(2.0 * display_x - 1.0);
    const T y = static_cast<T>(2.0 * display_y - 1.0);
    std::vector<T> coords(dom.n_u * dom.n_v * tile_h * tile_w * kCoordCount);
    std::size_t k = 0;
    for (std::size_t iu = 0; iu < dom.n_u; ++iu) {
        const T u = static_cast<T>(dom.u_center(iu) / cov_half_u);
        for (std::size_t iv = 0; iv < dom.n_v; ++iv) {
            const T v = static_cast<T>(dom.v_center(iv) / cov_half_v);
            for (std::size_t s = 0; s < tile_h; ++s) {
                const T sn = static_cast<T>(2.0 * (static_cast<double>(s) + 0.5) /
                                                static_cast<double>(tile_h) - 1.0);
                for (std::size_t t = 0; t < tile_w; ++t) {
                    const T tn = static_cast<T>(2.0 * (static_cast<double>(t) + 0.5) /
                                                    static_cast<double>(tile_w) - 1.0);
                    coords[k++] = x;
                    coords[k++] = y;
                    coords[k++] = u;
                    coords[k++] = v;
                    coords[k++] = sn;
                    coords[k++] = tn;
                }
            }
        }
    }
    return coords;
}

/// Sequentially jitters every coordinate row from one stream, so the draw
/// order (and hence the run) is reproducible.
template <typename T>
void add_row_noise(const NoiseConfig& cfg, std::vector<T>& coords, RngStream& rng) {
    if (!cfg.enabled) return;
    for (std::size_t r = 0; r < coords.size(); r += kCoordCount)
        inject_coordinate_noise(cfg, coords.data() + r, rng);
}

template <typename T>
std::vector<T> encode_rows(const EncoderConfig& cfg, const std::vector<T>& coords) {
    if (coords.size() % kCoordCount != 0)
        throw std::invalid_argument("encode_rows: coordinate row size mismatch");
    const std::size_t n = coords.size() / kCoordCount;
    const std::size_t w = encoded_width(cfg);
    std::vector<T> out(n * w);
    parallel_for(n, [&](std::size_t r) {
        positional_encode(cfg, coords.data() + r * kCoordCount, out.data() + r * w);
    });
    return out;
}

/// Dimensions of the per-angle measurement: a view tile and a PSF patch per
/// angular bin. Predicted tiles keep the view tile size.
struct LfGrid {
    std::size_t n_u = 0, n_v = 0; // angular bins
    std::size_t th = 0, tw = 0;   // view tile
    std::size_t ph = 0, pw = 0;   // PSF patch

    std::size_t windows() const { return n_u * n_v; }
    std::size_t views_size() const { return n_u * n_v * th * tw; }
    std::size_t psf_size() const { return n_u * n_v * ph * pw; }
    void validate() const {
        if (n_u == 0 || n_v == 0 || th == 0 || tw == 0 || ph == 0 || pw == 0)
            throw ConfigError("LfGrid: empty dimension");
    }
};

/// Per-window measurement: centered crop of view * patch back to the tile
/// size, all windows independent.
template <typename T>
void lf_predict(const LfGrid& g, const std::vector<T>& views,
                const std::vector<T>& psf, std::vector<T>& pred) {
    g.validate();
    if (views.size() != g.views_size() || psf.size() != g.psf_size())
        throw std::invalid_argument("lf_predict: size mismatch");
    pred.resize(views.size());
    const std::size_t fh = g.th + g.ph - 1, fw = g.tw + g.pw - 1;
    const std::size_t oi = (fh - g.th) / 2, oj = (fw - g.tw) / 2;
    parallel_for(g.windows(), [&](std::size_t wdx) {
        const T* view = views.data() + wdx * g.th * g.tw;
        const T* patch = psf.data() + wdx * g.ph * g.pw;
        const std::vector<T> full = conv_full_2d(view, g.th, g.tw, patch, g.ph, g.pw);
        T* out = pred.data() + wdx * g.th * g.tw;
        for (std::size_t r = 0; r < g.th; ++r)
            for (std::size_t c = 0; c < g.tw; ++c)
                out[r * g.tw + c] = full[(r + oi) * fw + (c + oj)];
    });
}

/// Adjoint of lf_predict with respect to the views: zero-embed the tile
/// gradient into the full-convolution support, then correlate with the patch.
template <typename T>
void lf_predict_adjoint(const LfGrid& g, const std::vector<T>& dpred,
                        const std::vector<T>& psf, std::vector<T>& dviews) {
    g.validate();
    if (dpred.size() != g.views_size() || psf.size() != g.psf_size())
        throw std::invalid_argument("lf_predict_adjoint: size mismatch");
    dviews.resize(dpred.size());
    const std::size_t fh = g.th + g.ph - 1, fw = g.tw + g.pw - 1;
    const std::size_t oi = (fh - g.th) / 2, oj = (fw - g.tw) / 2;
    parallel_for(g.windows(), [&](std::size_t wdx) {
        const T* dtile = dpred.data() + wdx * g.th * g.tw;
        const T* patch = psf.data() + wdx * g.ph * g.pw;
        std::vector<T> dfull(fh * fw, T(0));
        for (std::size_t r = 0; r < g.th; ++r)
            for (std::size_t c = 0; c < g.tw; ++c)
                dfull[(r + oi) * fw + (c + oj)] = dtile[r * g.tw + c];
        const std::vector<T> dv =
            conv_full_2d_adjoint(dfull.data(), fh, fw, patch, g.ph, g.pw);
        std::copy(dv.begin(), dv.end(), dviews.begin() + wdx * g.th * g.tw);
    });
}

/// Everything needed to score the network on one capture: encoded features
/// (one row per view pixel), the target tiles and the PSF patches.
template <typename T>
struct CaptureBatch {
    LfGrid grid;
    std::vector<T> features; // rows x feature width
    std::vector<T> gt_tiles; // views_size()
    std::vector<T> psf;      // psf_size()

    void validate(std::size_t feature_width) const {
        grid.validate();
        if (features.size() != grid.views_size() * feature_width)
            throw std::invalid_argument("CaptureBatch: feature size mismatch");
        if (gt_tiles.size() != grid.views_size())
            throw std::invalid_argument("CaptureBatch: target size mismatch");
        if (psf.size() != grid.psf_size())
            throw std::invalid_argument("CaptureBatch: psf size mismatch");
    }
};

/// Loss of the measurement pipeline net -> views -> per-window convolution
/// -> crop against the capture tiles.
template <typename T>
double capture_loss(const Mlp<T>& net, const CaptureBatch<T>& b, const LossConfig& lc) {
    b.validate(net.in_width());
    const std::size_t n = b.grid.views_size();
    std::vector<T> views(n);
    net.forward(b.features.data(), n, views.data());
    std::vector<T> pred;
    lf_predict(b.grid, views, b.psf, pred);
    return total_loss(b.gt_tiles.data(), pred.data(), n, lc);
}

/// Same loss plus its gradient with respect to every network parameter.
template <typename T>
double capture_loss_grad(const Mlp<T>& net, const CaptureBatch<T>& b,
                         const LossConfig& lc, std::vector<T>& grad) {
    b.validate(net.in_width());
    const std::size_t n = b.grid.views_size();
    std::vector<T> views(n);
    net.forward(b.features.data(), n, views.data());
    std::vector<T> pred;
    lf_predict(b.grid, views, b.psf, pred);
    std::vector<T> dpred(n);
    const double loss =
        total_loss_grad(b.gt_tiles.data(), pred.data(), n, lc, dpred.data());
    std::vector<T> dviews;
    lf_predict_adjoint(b.grid, dpred, b.psf, dviews);
    net.forward_backward(b.features.data(), n, dviews.data(), grad);
    return loss;
}

} // namespace drf
