#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "drf/angular.hpp"
#include "drf/fft_conv.hpp"
#include "drf/lightfield.hpp"
#include "drf/rng.hpp"
#include "drf/tensor.hpp"

namespace drf {

/// Aperture-array camera geometry. Distances in millimeters. The panel extent
/// describes the display region swept by the position grid; the sensor pixel
/// pitch converts caustic translations to pixels.
struct ApertureGeometry {
    double aperture_width = 2.5;  // horizontal extent n
    double aperture_height = 3.0; // vertical extent
    double standoff = 30.0;       // display pixel -> aperture plane (m)
    double sensor_gap = 10.0;     // aperture/diffuser -> sensor
    double panel_width = 0.0;     // display extent sampled by position offsets
    double panel_height = 0.0;
    double sensor_px_per_mm = 6.0;
    std::vector<std::array<double, 2>> aperture_centers{{0.0, 0.0}}; // (cx, cy)

    /// Throws ConfigError on non-positive dimensions or overlapping apertures.
    void validate() const;
};

/// The default five-aperture staircase layout. Pitch and panel extent are
/// chosen so the union of incident-angle ranges over all apertures and the
/// 3x3 display-position grid forms a contiguous 46.6 x 37.6 degree cone.
ApertureGeometry default_geometry();

struct AngleRange {
    double u_lo = 0.0, u_hi = 0.0; // degrees, horizontal
    double v_lo = 0.0, v_hi = 0.0; // vertical
};

/// Incidence-angle window of rays from a display pixel at the panel origin
/// through aperture `index`: horizontally
/// [atan((cx - n/2)/m), atan((cx + n/2)/m)], analogously vertically.
AngleRange incident_angle_range(const ApertureGeometry& g, std::size_t index);

/// Same, for a pixel displaced (px, py) millimeters from the panel center.
AngleRange incident_angle_range_at(const ApertureGeometry& g, std::size_t index,
                                   double px_mm, double py_mm);

/// Measure of the union of incident-angle ranges over every aperture and the
/// 3x3 grid of display positions spanning the panel extent. Degrees,
/// (horizontal, vertical).
std::pair<double, double> total_coverage(const ApertureGeometry& g);

/// Synthetic display emission: radiance
/// peak * max(0, cos(a_h u))^k * max(0, cos(a_v v))^k with anisotropy pair
/// (a_h, a_v), plus a Gaussian spatial spread within a sub-view tile.
struct DisplayEmissionModel {
    double falloff_exponent = 4.0;
    double anisotropy_h = 1.0;
    double anisotropy_v = 1.15;
    double spatial_spread_sigma = 3.0; // pixels within a sub-view tile
    double peak_intensity = 1.0;
};

double emission(const DisplayEmissionModel& model, double u_deg, double v_deg);

/// The shared diffuser caustic texture: smoothed, thresholded noise, values
/// >= 0, spread over the whole patch. Deterministic in the rng argument
/// (taken by value so a caller can reproduce it from an equal stream).
Tensor synth_base_texture(std::size_t patch_h, std::size_t patch_w, RngStream rng);

/// Per-angle PSF patches: the base texture translated by
/// sensor_gap * tan(angle) * sensor_px_per_mm pixels (u moves columns,
/// v moves rows) with bilinear subpixel interpolation, clipped to the patch
/// and renormalized to unit sum. Throws ConfigError("angle outside sensor
/// support") when a translation reaches half the patch extent.
PsfStack synth_psf_stack(const ApertureGeometry& g, const AngularDomain& dom,
                         std::size_t patch_h, std::size_t patch_w, RngStream rng);

/// Ground-truth light field for one capture: emission at each angular bin
/// center times a peak-one Gaussian blob at the tile center, on the window
/// grid of `dom` (which realizes the restriction to the aperture's angles).
LightField ground_truth_lightfield(const AngularDomain& dom,
                                   const DisplayEmissionModel& model,
                                   double display_x, double display_y,
                                   std::size_t tile_h, std::size_t tile_w);

/// Simulates one lensless capture: ground-truth light field, per-angle
/// convolution with the PSF stack, tiles assembled into the capture image,
/// additive Gaussian sensor noise clamped at zero.
Capture simulate_capture(const ApertureGeometry& g, const AngularDomain& dom,
                         const PsfStack& psfs, const DisplayEmissionModel& model,
                         std::array<double, 2> display_pos, std::size_t aperture_index,
                         double noise_sigma, RngStream rng);

} // namespace drf
