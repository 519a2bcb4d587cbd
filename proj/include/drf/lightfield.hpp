#pragma once

#include <array>
#include <functional>
#include <string>

#include "drf/angular.hpp"
#include "drf/tensor.hpp"

namespace drf {

enum class Channel { R, G, B };

std::string channel_name(Channel c);
Channel channel_from_name(const std::string& name);

/// Radiance samples L(x,y,u,v,s,t) at one display position: an angular grid
/// of sub-view images. views is [n_u, n_v, h, w].
struct LightField {
    double display_x = 0.0, display_y = 0.0; // normalized [0,1] panel coords
    AngularDomain domain;
    Tensor views;

    LightField() = default;
    LightField(double x, double y, AngularDomain dom, Tensor v);
};

/// One lensless measurement with its provenance.
struct Capture {
    Tensor image;
    double display_x = 0.0, display_y = 0.0;
    std::size_t aperture_index = 0;
    Channel channel = Channel::G;
};

/// Splits an image into the non-overlapping n_u x n_v grid of win_h x win_w
/// tiles taken from the centered region; tile (i,j) covers input rows
/// [i*win_h, (i+1)*win_h) of that region. Returns [n_u, n_v, win_h, win_w].
Tensor extract_subapertures(const Tensor& image, std::size_t n_u, std::size_t n_v,
                            std::size_t win_h, std::size_t win_w);
Tensor extract_subapertures(const Capture& c, std::size_t n_u = 9, std::size_t n_v = 9,
                            std::size_t win_h = 54, std::size_t win_w = 70);

/// Inverse of extract_subapertures for an exact-size image:
/// [n_u, n_v, h, w] -> [n_u*h, n_v*w].
Tensor assemble_subapertures(const Tensor& tiles);

/// Discretized image formation: sum over (u,v) of views[u,v] * du * dv with
/// the bin sizes of the angular grid.
Tensor form_image(const LightField& lf);

/// Continuous radiance lookup used by render_view; arguments are
/// (x, y, u_deg, v_deg, s, t) with (x,y) normalized panel coordinates and
/// (s,t) normalized sub-view coordinates in [-1,1].
using RadianceFn = std::function<double(double, double, double, double, double, double)>;

struct RenderResult {
    Tensor image; // [out_h, out_w]
    Tensor mask;  // [out_h, out_w], 1 where the query angle lies inside coverage
};

/// Renders the panel as seen from camera_mm = (X,Y,Z) millimeters relative to
/// the panel center (Z > 0 in front). Each output pixel maps to a panel
/// position; the view angle to the camera selects (u,v); the radiance is
/// queried at the central sub-view coordinate. coverage_deg is the total
/// (horizontal, vertical) angular span used for the mask.
RenderResult render_view(const RadianceFn& radiance, std::array<double, 3> camera_mm,
                         double panel_width_mm, double panel_height_mm,
                         std::array<double, 2> coverage_deg,
                         std::size_t out_h, std::size_t out_w);

} // namespace drf
