#pragma once

#include <cstddef>

#include "drf/angular.hpp"
#include "drf/fft.hpp"
#include "drf/tensor.hpp"

namespace drf {

/// Centers t in an out_h x out_w zero canvas (floor offsets). Sum-preserving.
Tensor zero_pad(const Tensor& t, std::size_t out_h, std::size_t out_w);

/// Central out_h x out_w window with the same floor-offset convention, so
/// crop_center(zero_pad(x, H, W), h, w) == x.
Tensor crop_center(const Tensor& t, std::size_t out_h, std::size_t out_w);

/// Full linear convolution scene * psf via padded DFTs,
/// output [h+ph-1, w+pw-1].
Tensor conv2d_linear(const Tensor& scene, const Tensor& psf);

/// Measurement operator for a single 2D capture: crop of the full linear
/// convolution with the system PSF.
struct ForwardModel {
    Tensor psf; // also fixes the expected scene shape
    std::size_t out_h = 0;
    std::size_t out_w = 0;

    ForwardModel(Tensor psf_in, std::size_t h, std::size_t w);
};

Tensor forward_measure(const ForwardModel& model, const Tensor& scene);

/// Per-angle PSF patches over an angular grid: patches[u, v, :, :] is the
/// sensor response for incidence bin (u, v).
struct PsfStack {
    Tensor patches; // [n_u, n_v, ph, pw]
    AngularDomain domain;

    PsfStack() = default;
    PsfStack(Tensor patches_in, AngularDomain dom);

    std::size_t patch_h() const { return patches.dim(2); }
    std::size_t patch_w() const { return patches.dim(3); }
    const float* patch(std::size_t iu, std::size_t iv) const {
        return patches.data() + ((iu * domain.n_v + iv) * patch_h()) * patch_w();
    }
};

/// Per-angle forward model: out[u,v] is the centered crop of
/// views[u,v] * patches[u,v], same spatial size as the input views.
/// The tiled assembly of the output windows is the predicted capture.
Tensor forward_measure_lf(const PsfStack& psfs, const Tensor& lf_views);

} // namespace drf
