#include "drf/fft_conv.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "drf/parallel.hpp"

namespace drf {

Tensor zero_pad(const Tensor& t, std::size_t out_h, std::size_t out_w) {
    if (t.rank() != 2) throw std::invalid_argument("zero_pad: rank-2 tensor expected");
    const std::size_t h = t.dim(0), w = t.dim(1);
    if (out_h < h || out_w < w)
        throw std::invalid_argument("zero_pad: target smaller than input");
    Tensor out({out_h, out_w});
    const std::size_t ro = (out_h - h) / 2, co = (out_w - w) / 2;
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            out.at(r + ro, c + co) = t.at(r, c);
    return out;
}

Tensor crop_center(const Tensor& t, std::size_t out_h, std::size_t out_w) {
    if (t.rank() != 2) throw std::invalid_argument("crop_center: rank-2 tensor expected");
    const std::size_t h = t.dim(0), w = t.dim(1);
    if (out_h > h || out_w > w)
        throw std::invalid_argument("crop_center: target larger than input");
    Tensor out({out_h, out_w});
    const std::size_t ro = (h - out_h) / 2, co = (w - out_w) / 2;
    for (std::size_t r = 0; r < out_h; ++r)
        for (std::size_t c = 0; c < out_w; ++c)
            out.at(r, c) = t.at(r + ro, c + co);
    return out;
}

Tensor conv2d_linear(const Tensor& scene, const Tensor& psf) {
    if (scene.rank() != 2 || psf.rank() != 2)
        throw std::invalid_argument("conv2d_linear: rank-2 tensors expected");
    if (scene.empty() || psf.empty())
        throw std::invalid_argument("conv2d_linear: empty tensor");
    const std::size_t h = scene.dim(0), w = scene.dim(1);
    const std::size_t ph = psf.dim(0), pw = psf.dim(1);
    std::vector<float> out = conv_full_2d(scene.data(), h, w, psf.data(), ph, pw);
    return Tensor::from_data({h + ph - 1, w + pw - 1}, std::move(out));
}

ForwardModel::ForwardModel(Tensor psf_in, std::size_t h, std::size_t w)
    : psf(std::move(psf_in)), out_h(h), out_w(w) {
    if (psf.rank() != 2 || psf.empty())
        throw std::invalid_argument("ForwardModel: rank-2 PSF expected");
    for (std::size_t i = 0; i < psf.size(); ++i)
        if (!(psf[i] >= 0.0f) || !std::isfinite(psf[i]))
            throw std::invalid_argument("ForwardModel: PSF must be finite and non-negative");
    // The crop has to fit inside the full linear-convolution support.
    if (out_h > 2 * psf.dim(0) - 1 || out_w > 2 * psf.dim(1) - 1)
        throw std::invalid_argument("ForwardModel: output exceeds convolution support");
}

Tensor forward_measure(const ForwardModel& model, const Tensor& scene) {
    if (scene.rank() != 2 || scene.dim(0) != model.psf.dim(0) ||
        scene.dim(1) != model.psf.dim(1))
        throw std::invalid_argument("forward_measure: scene shape must match PSF shape");
    return crop_center(conv2d_linear(scene, model.psf), model.out_h, model.out_w);
}

PsfStack::PsfStack(Tensor patches_in, AngularDomain dom)
    : patches(std::move(patches_in)), domain(dom) {
    if (patches.rank() != 4)
        throw std::invalid_argument("PsfStack: [n_u, n_v, ph, pw] tensor expected");
    if (patches.dim(0) != domain.n_u || patches.dim(1) != domain.n_v)
        throw std::invalid_argument("PsfStack: patch grid does not match angular domain");
}

Tensor forward_measure_lf(const PsfStack& psfs, const Tensor& lf_views) {
    if (lf_views.rank() != 4)
        throw std::invalid_argument("forward_measure_lf: [n_u, n_v, h, w] views expected");
    const std::size_t nu = lf_views.dim(0), nv = lf_views.dim(1);
    if (nu != psfs.domain.n_u || nv != psfs.domain.n_v)
        throw std::invalid_argument("forward_measure_lf: angular grid mismatch (views " +
                                    std::to_string(nu) + "x" + std::to_string(nv) +
                                    ", stack " + std::to_string(psfs.domain.n_u) + "x" +
                                    std::to_string(psfs.domain.n_v) + ")");
    const std::size_t h = lf_views.dim(2), w = lf_views.dim(3);
    const std::size_t ph = psfs.patch_h(), pw = psfs.patch_w();

    Tensor out({nu, nv, h, w});
    parallel_for(nu * nv, [&](std::size_t idx) {
        const std::size_t iu = idx / nv, iv = idx % nv;
        const float* view = lf_views.data() + ((iu * nv + iv) * h) * w;
        std::vector<float> full =
            conv_full_2d(view, h, w, psfs.patch(iu, iv), ph, pw);
        // Centered crop back to the window size, floor offsets.
        const std::size_t fh = h + ph - 1, fw = w + pw - 1;
        const std::size_t ro = (fh - h) / 2, co = (fw - w) / 2;
        float* dst = out.data() + ((iu * nv + iv) * h) * w;
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c)
                dst[r * w + c] = full[(r + ro) * fw + (c + co)];
    });
    return out;
}

} // namespace drf
