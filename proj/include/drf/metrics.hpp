#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "drf/angular.hpp"
#include "drf/lightfield.hpp"
#include "drf/tensor.hpp"

namespace drf {

inline constexpr double kPsnrCap = 99.0;

/// Mean squared error accumulated in double. Shapes must match.
double mse(const Tensor& a, const Tensor& b);

/// 10 * log10(peak^2 / MSE), capped at kPsnrCap (also for identical inputs).
double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

/// Single-scale SSIM on rank-2 images: 11x11 Gaussian window sigma 1.5,
/// K1 = 0.01, K2 = 0.03, dynamic range 1.0, mean over valid windows.
/// Requires min(h, w) >= 11.
double ssim(const Tensor& a, const Tensor& b);

/// Multi-scale SSIM with the standard per-scale weights
/// (0.0448, 0.2856, 0.3001, 0.2363, 0.1333), dyadic 2x downsampling by
/// 2x2 mean. Fewer scales renormalize the leading weights to sum one, so
/// scales == 1 reduces to plain ssim. Per-scale terms are clamped to [0, 1].
double msssim(const Tensor& a, const Tensor& b, std::size_t scales = 5);

/// Largest scale count msssim accepts for these image dimensions.
std::size_t max_msssim_scales(const Tensor& a);

/// Mean intensity versus combined angular deviation sqrt(u^2 + v^2).
/// Bins are uniform in radius; the best-lit bin is normalized to 1.0.
/// Empty bins keep count 0 and a NaN intensity.
struct AngularProfile {
    std::vector<double> radii;          // bin centers, degrees, increasing
    std::vector<double> mean_intensity; // max bin == 1.0; NaN where count == 0
    std::vector<std::size_t> counts;
};

using AngularIntensityFn = std::function<double(double u_deg, double v_deg)>;

AngularProfile angular_profile(const AngularIntensityFn& intensity,
                               const AngularDomain& domain, std::size_t bins);

/// Profile of a light field: per-direction intensity is the mean over the
/// view tile.
AngularProfile angular_profile(const LightField& field, std::size_t bins);

/// Rows "r<i>,<intensity>" for non-empty bins, via export_csv.
void export_profile_csv(const AngularProfile& profile, const std::string& path);

/// Spearman rank correlation with average ranks for ties. Throws on fewer
/// than two samples or a constant input.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

} // namespace drf
