#include "drf/lightfield.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "drf/errors.hpp"
#include "drf/fft_conv.hpp"
#include "drf/parallel.hpp"

namespace drf {

std::string channel_name(Channel c) {
    switch (c) {
        case Channel::R: return "R";
        case Channel::G: return "G";
        case Channel::B: return "B";
    }
    throw std::logic_error("channel_name: bad channel");
}

Channel channel_from_name(const std::string& name) {
    if (name == "R") return Channel::R;
    if (name == "G") return Channel::G;
    if (name == "B") return Channel::B;
    throw ConfigError("unknown channel '" + name + "' (expected R, G or B)");
}

LightField::LightField(double x, double y, AngularDomain dom, Tensor v)
    : display_x(x), display_y(y), domain(dom), views(std::move(v)) {
    if (views.rank() != 4)
        throw std::invalid_argument("LightField: [n_u, n_v, h, w] views expected");
    if (views.dim(0) != domain.n_u || views.dim(1) != domain.n_v)
        throw std::invalid_argument("LightField: views do not match the angular grid");
    for (std::size_t i = 0; i < views.size(); ++i)
        if (!std::isfinite(views[i]))
            throw std::invalid_argument("LightField: non-finite view data");
}

Tensor extract_subapertures(const Tensor& image, std::size_t n_u, std::size_t n_v,
                            std::size_t win_h, std::size_t win_w) {
    if (image.rank() != 2)
        throw std::invalid_argument("extract_subapertures: rank-2 image expected");
    const std::size_t need_h = n_u * win_h, need_w = n_v * win_w;
    if (image.dim(0) < need_h || image.dim(1) < need_w)
        throw ConfigError("extract_subapertures: capture " + std::to_string(image.dim(0)) +
                          "x" + std::to_string(image.dim(1)) + " too small for " +
                          std::to_string(n_u) + "x" + std::to_string(n_v) + " tiles of " +
                          std::to_string(win_h) + "x" + std::to_string(win_w));
    const Tensor centered = crop_center(image, need_h, need_w);
    Tensor tiles({n_u, n_v, win_h, win_w});
    for (std::size_t i = 0; i < n_u; ++i)
        for (std::size_t j = 0; j < n_v; ++j)
            for (std::size_t r = 0; r < win_h; ++r)
                for (std::size_t c = 0; c < win_w; ++c)
                    tiles.at(i, j, r, c) = centered.at(i * win_h + r, j * win_w + c);
    return tiles;
}

Tensor extract_subapertures(const Capture& c, std::size_t n_u, std::size_t n_v,
                            std::size_t win_h, std::size_t win_w) {
    return extract_subapertures(c.image, n_u, n_v, win_h, win_w);
}

Tensor assemble_subapertures(const Tensor& tiles) {
    if (tiles.rank() != 4)
        throw std::invalid_argument("assemble_subapertures: [n_u, n_v, h, w] expected");
    const std::size_t n_u = tiles.dim(0), n_v = tiles.dim(1);
    const std::size_t h = tiles.dim(2), w = tiles.dim(3);
    Tensor image({n_u * h, n_v * w});
    for (std::size_t i = 0; i < n_u; ++i)
        for (std::size_t j = 0; j < n_v; ++j)
            for (std::size_t r = 0; r < h; ++r)
                for (std::size_t c = 0; c < w; ++c)
                    image.at(i * h + r, j * w + c) = tiles.at(i, j, r, c);
    return image;
}

Tensor form_image(const LightField& lf) {
    const std::size_t h = lf.views.dim(2), w = lf.views.dim(3);
    const double du = lf.domain.u_step(), dv = lf.domain.v_step();
    Tensor image({h, w});
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (std::size_t iu = 0; iu < lf.domain.n_u; ++iu)
                for (std::size_t iv = 0; iv < lf.domain.n_v; ++iv)
                    acc += lf.views.at(iu, iv, r, c);
            image.at(r, c) = static_cast<float>(acc * du * dv);
        }
    return image;
}

RenderResult render_view(const RadianceFn& radiance, std::array<double, 3> camera_mm,
                         double panel_width_mm, double panel_height_mm,
                         std::array<double, 2> coverage_deg,
                         std::size_t out_h, std::size_t out_w) {
    if (!(camera_mm[2] > 0.0))
        throw ConfigError("render_view: camera must be in front of the panel (Z > 0)");
    if (panel_width_mm <= 0.0 || panel_height_mm <= 0.0)
        throw ConfigError("render_view: panel extent must be positive");

    constexpr double kDegPerRad = 180.0 / std::numbers::pi;
    RenderResult res{Tensor({out_h, out_w}), Tensor({out_h, out_w})};
    parallel_for(out_h, [&](std::size_t i) {
        for (std::size_t j = 0; j < out_w; ++j) {
            const double x = (static_cast<double>(j) + 0.5) / static_cast<double>(out_w);
            const double y = (static_cast<double>(i) + 0.5) / static_cast<double>(out_h);
            const double px_mm = (x - 0.5) * panel_width_mm;
            const double py_mm = (y - 0.5) * panel_height_mm;
            const double u = std::atan((camera_mm[0] - px_mm) / camera_mm[2]) * kDegPerRad;
            const double v = std::atan((camera_mm[1] - py_mm) / camera_mm[2]) * kDegPerRad;
            res.image.at(i, j) = static_cast<float>(radiance(x, y, u, v, 0.0, 0.0));
            const bool inside = std::fabs(u) <= coverage_deg[0] / 2.0 &&
                                std::fabs(v) <= coverage_deg[1] / 2.0;
            res.mask.at(i, j) = inside ? 1.0f : 0.0f;
        }
    });
    return res;
}

} // namespace drf
