#include "drf/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "drf/errors.hpp"

namespace drf {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

double atan_deg(double opposite, double adjacent) {
    return std::atan(opposite / adjacent) * kDegPerRad;
}

// Sum of the lengths of a union of closed intervals.
double union_measure(std::vector<std::pair<double, double>> spans) {
    std::sort(spans.begin(), spans.end());
    double total = 0.0;
    double lo = 0.0, hi = -1.0;
    bool open = false;
    for (const auto& [a, b] : spans) {
        if (!open || a > hi) {
            if (open) total += hi - lo;
            lo = a;
            hi = b;
            open = true;
        } else {
            hi = std::max(hi, b);
        }
    }
    if (open) total += hi - lo;
    return total;
}

} // namespace

void ApertureGeometry::validate() const {
    if (!(aperture_width > 0.0) || !(aperture_height > 0.0))
        throw ConfigError("geometry: aperture dimensions must be positive");
    if (!(standoff > 0.0) || !(sensor_gap > 0.0))
        throw ConfigError("geometry: standoff and sensor gap must be positive");
    if (!(sensor_px_per_mm > 0.0))
        throw ConfigError("geometry: sensor pixel pitch must be positive");
    if (panel_width < 0.0 || panel_height < 0.0)
        throw ConfigError("geometry: panel extent must be non-negative");
    if (aperture_centers.empty())
        throw ConfigError("geometry: at least one aperture required");
    for (std::size_t i = 0; i < aperture_centers.size(); ++i)
        for (std::size_t j = i + 1; j < aperture_centers.size(); ++j) {
            const double dx = std::fabs(aperture_centers[i][0] - aperture_centers[j][0]);
            const double dy = std::fabs(aperture_centers[i][1] - aperture_centers[j][1]);
            if (dx < aperture_width && dy < aperture_height)
                throw ConfigError("geometry: apertures " + std::to_string(i) + " and " +
                                  std::to_string(j) + " overlap");
        }
}

ApertureGeometry default_geometry() {
    // One third of the aperture pitch per axis; the 3x3 position grid then
    // fills the gaps between neighboring aperture windows, making the union
    // of incidence ranges one contiguous 46.6 x 37.6 degree cone.
    constexpr double kStepH = 1.667148741; // mm
    constexpr double kStepV = 1.244690437;
    ApertureGeometry g;
    g.aperture_width = 2.5;
    g.aperture_height = 3.0;
    g.standoff = 30.0;
    g.sensor_gap = 10.0;
    g.panel_width = 2.0 * kStepH;
    g.panel_height = 2.0 * kStepV;
    g.sensor_px_per_mm = 6.0;
    g.aperture_centers.clear();
    for (int k = -2; k <= 2; ++k)
        g.aperture_centers.push_back({k * 3.0 * kStepH, k * 3.0 * kStepV});
    return g;
}

AngleRange incident_angle_range_at(const ApertureGeometry& g, std::size_t index,
                                   double px_mm, double py_mm) {
    if (index >= g.aperture_centers.size())
        throw ConfigError("aperture index " + std::to_string(index) + " out of range (" +
                          std::to_string(g.aperture_centers.size()) + " apertures)");
    const double cx = g.aperture_centers[index][0] - px_mm;
    const double cy = g.aperture_centers[index][1] - py_mm;
    AngleRange r;
    r.u_lo = atan_deg(cx - g.aperture_width / 2.0, g.standoff);
    r.u_hi = atan_deg(cx + g.aperture_width / 2.0, g.standoff);
    r.v_lo = atan_deg(cy - g.aperture_height / 2.0, g.standoff);
    r.v_hi = atan_deg(cy + g.aperture_height / 2.0, g.standoff);
    return r;
}

AngleRange incident_angle_range(const ApertureGeometry& g, std::size_t index) {
    return incident_angle_range_at(g, index, 0.0, 0.0);
}

std::pair<double, double> total_coverage(const ApertureGeometry& g) {
    std::vector<std::pair<double, double>> h_spans, v_spans;
    const double ox[3] = {-g.panel_width / 2.0, 0.0, g.panel_width / 2.0};
    const double oy[3] = {-g.panel_height / 2.0, 0.0, g.panel_height / 2.0};
    for (std::size_t a = 0; a < g.aperture_centers.size(); ++a)
        for (int p = 0; p < 3; ++p) {
            const AngleRange rh = incident_angle_range_at(g, a, ox[p], 0.0);
            h_spans.emplace_back(rh.u_lo, rh.u_hi);
            const AngleRange rv = incident_angle_range_at(g, a, 0.0, oy[p]);
            v_spans.emplace_back(rv.v_lo, rv.v_hi);
        }
    return {union_measure(std::move(h_spans)), union_measure(std::move(v_spans))};
}

double emission(const DisplayEmissionModel& model, double u_deg, double v_deg) {
    const double uh = model.anisotropy_h * u_deg / kDegPerRad;
    const double vv = model.anisotropy_v * v_deg / kDegPerRad;
    const double ch = std::max(0.0, std::cos(uh));
    const double cv = std::max(0.0, std::cos(vv));
    return model.peak_intensity * std::pow(ch, model.falloff_exponent) *
           std::pow(cv, model.falloff_exponent);
}

Tensor synth_base_texture(std::size_t patch_h, std::size_t patch_w, RngStream rng) {
    if (patch_h < 8 || patch_w < 8)
        throw ConfigError("synth_base_texture: patch dimensions must be at least 8");

    Tensor noise({patch_h, patch_w});
    for (std::size_t i = 0; i < noise.size(); ++i)
        noise[i] = static_cast<float>(rng.uniform());

    // Separable Gaussian blur, sigma 1, radius 3, zero boundary.
    constexpr int radius = 3;
    double kernel[2 * radius + 1];
    double ksum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-0.5 * k * k);
        ksum += kernel[k + radius];
    }
    for (double& k : kernel) k /= ksum;

    Tensor tmp({patch_h, patch_w});
    for (std::size_t r = 0; r < patch_h; ++r)
        for (std::size_t c = 0; c < patch_w; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const long cc = static_cast<long>(c) + k;
                if (cc >= 0 && cc < static_cast<long>(patch_w))
                    acc += kernel[k + radius] * noise.at(r, static_cast<std::size_t>(cc));
            }
            tmp.at(r, c) = static_cast<float>(acc);
        }
    Tensor blurred({patch_h, patch_w});
    for (std::size_t r = 0; r < patch_h; ++r)
        for (std::size_t c = 0; c < patch_w; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const long rr = static_cast<long>(r) + k;
                if (rr >= 0 && rr < static_cast<long>(patch_h))
                    acc += kernel[k + radius] * tmp.at(static_cast<std::size_t>(rr), c);
            }
            blurred.at(r, c) = static_cast<float>(acc);
        }

    // Keep the brightest ~40% as caustic filaments.
    std::vector<float> sorted(blurred.values());
    const std::size_t cut = (sorted.size() * 6) / 10;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(cut), sorted.end());
    const float threshold = sorted[cut];

    Tensor texture({patch_h, patch_w});
    for (std::size_t i = 0; i < texture.size(); ++i)
        texture[i] = std::max(0.0f, blurred[i] - threshold);
    return texture;
}

namespace {

// Translates `src` by (dy, dx) pixels with bilinear interpolation; content
// moved past the border is discarded, vacated pixels are zero.
Tensor shift_bilinear(const Tensor& src, double dy, double dx) {
    const std::size_t h = src.dim(0), w = src.dim(1);
    Tensor out({h, w});
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            const double sr = static_cast<double>(r) - dy;
            const double sc = static_cast<double>(c) - dx;
            const double fr = std::floor(sr), fc = std::floor(sc);
            const double wr = sr - fr, wc = sc - fc;
            double acc = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    const long rr = static_cast<long>(fr) + i;
                    const long cc = static_cast<long>(fc) + j;
                    if (rr < 0 || cc < 0 || rr >= static_cast<long>(h) ||
                        cc >= static_cast<long>(w))
                        continue;
                    const double weight = (i ? wr : 1.0 - wr) * (j ? wc : 1.0 - wc);
                    acc += weight * src.at(static_cast<std::size_t>(rr),
                                           static_cast<std::size_t>(cc));
                }
            out.at(r, c) = static_cast<float>(acc);
        }
    return out;
}

} // namespace

PsfStack synth_psf_stack(const ApertureGeometry& g, const AngularDomain& dom,
                         std::size_t patch_h, std::size_t patch_w, RngStream rng) {
    g.validate();
    const Tensor texture = synth_base_texture(patch_h, patch_w, rng);

    Tensor patches({dom.n_u, dom.n_v, patch_h, patch_w});
    for (std::size_t iu = 0; iu < dom.n_u; ++iu)
        for (std::size_t iv = 0; iv < dom.n_v; ++iv) {
            const double u = dom.u_center(iu), v = dom.v_center(iv);
            const double dx = g.sensor_gap * std::tan(u / kDegPerRad) * g.sensor_px_per_mm;
            const double dy = g.sensor_gap * std::tan(v / kDegPerRad) * g.sensor_px_per_mm;
            if (std::fabs(dx) >= static_cast<double>(patch_w) / 2.0 ||
                std::fabs(dy) >= static_cast<double>(patch_h) / 2.0)
                throw ConfigError("angle outside sensor support (u=" + std::to_string(u) +
                                  ", v=" + std::to_string(v) + " shifts the caustic by (" +
                                  std::to_string(dy) + ", " + std::to_string(dx) +
                                  ") px on a " + std::to_string(patch_h) + "x" +
                                  std::to_string(patch_w) + " patch)");
            Tensor shifted = shift_bilinear(texture, dy, dx);
            double sum = 0.0;
            for (std::size_t i = 0; i < shifted.size(); ++i) sum += shifted[i];
            if (!(sum > 0.0))
                throw NumericError("synth_psf_stack: degenerate PSF patch at (" +
                                   std::to_string(u) + ", " + std::to_string(v) + ")");
            for (std::size_t r = 0; r < patch_h; ++r)
                for (std::size_t c = 0; c < patch_w; ++c)
                    patches.at(iu, iv, r, c) =
                        static_cast<float>(shifted.at(r, c) / sum);
        }
    return PsfStack(std::move(patches), dom);
}

LightField ground_truth_lightfield(const AngularDomain& dom,
                                   const DisplayEmissionModel& model,
                                   double display_x, double display_y,
                                   std::size_t tile_h, std::size_t tile_w) {
    Tensor views({dom.n_u, dom.n_v, tile_h, tile_w});
    const double rc = (static_cast<double>(tile_h) - 1.0) / 2.0;
    const double cc = (static_cast<double>(tile_w) - 1.0) / 2.0;
    const double sigma = model.spatial_spread_sigma;
    for (std::size_t iu = 0; iu < dom.n_u; ++iu)
        for (std::size_t iv = 0; iv < dom.n_v; ++iv) {
            const double e = emission(model, dom.u_center(iu), dom.v_center(iv));
            for (std::size_t r = 0; r < tile_h; ++r)
                for (std::size_t c = 0; c < tile_w; ++c) {
                    const double dr = static_cast<double>(r) - rc;
                    const double dc = static_cast<double>(c) - cc;
                    views.at(iu, iv, r, c) = static_cast<float>(
                        e * std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma)));
                }
        }
    return LightField(display_x, display_y, dom, std::move(views));
}

Capture simulate_capture(const ApertureGeometry& g, const AngularDomain& dom,
                         const PsfStack& psfs, const DisplayEmissionModel& model,
                         std::array<double, 2> display_pos, std::size_t aperture_index,
                         double noise_sigma, RngStream rng) {
    g.validate();
    if (aperture_index >= g.aperture_centers.size())
        throw ConfigError("simulate_capture: aperture index out of range");
    if (display_pos[0] < 0.0 || display_pos[0] > 1.0 || display_pos[1] < 0.0 ||
        display_pos[1] > 1.0)
        throw ConfigError("simulate_capture: display position outside [0,1]^2");
    if (noise_sigma < 0.0)
        throw ConfigError("simulate_capture: negative noise sigma");
    if (!dom.same_grid(psfs.domain) || dom.u_min != psfs.domain.u_min ||
        dom.u_max != psfs.domain.u_max || dom.v_min != psfs.domain.v_min ||
        dom.v_max != psfs.domain.v_max)
        throw ConfigError("simulate_capture: angular domain does not match PSF stack");

    const LightField lf = ground_truth_lightfield(dom, model, display_pos[0],
                                                  display_pos[1], psfs.patch_h(),
                                                  psfs.patch_w());
    const Tensor measured = forward_measure_lf(psfs, lf.views);
    Tensor image = assemble_subapertures(measured);
    if (noise_sigma > 0.0)
        for (std::size_t i = 0; i < image.size(); ++i)
            image[i] = std::max(
                0.0f, image[i] + static_cast<float>(rng.normal(0.0, noise_sigma)));

    Capture cap;
    cap.image = std::move(image);
    cap.display_x = display_pos[0];
    cap.display_y = display_pos[1];
    cap.aperture_index = aperture_index;
    return cap;
}

} // namespace drf
