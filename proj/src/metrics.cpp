#include "drf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "drf/errors.hpp"
#include "drf/tensor_io.hpp"

namespace drf {

namespace {

constexpr std::size_t kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01; // (K1 * L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;

const std::vector<double>& gaussian_taps() {
    static const std::vector<double> taps = [] {
        std::vector<double> t(kWin);
        double sum = 0.0;
        for (std::size_t i = 0; i < kWin; ++i) {
            const double d = static_cast<double>(i) - 5.0;
            t[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            sum += t[i];
        }
        for (double& v : t) v /= sum;
        return t;
    }();
    return taps;
}

// Valid-region separable Gaussian filter: (h, w) -> (h-10, w-10).
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t h,
                                 std::size_t w) {
    const auto& g = gaussian_taps();
    const std::size_t ow = w - kWin + 1, oh = h - kWin + 1;
    std::vector<double> tmp(h * ow);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < kWin; ++k) acc += g[k] * src[r * w + c + k];
            tmp[r * ow + c] = acc;
        }
    std::vector<double> out(oh * ow);
    for (std::size_t r = 0; r < oh; ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < kWin; ++k) acc += g[k] * tmp[(r + k) * ow + c];
            out[r * ow + c] = acc;
        }
    return out;
}

struct SsimTerms {
    double ssim;
    double cs; // contrast-structure factor alone
};

SsimTerms ssim_terms(const std::vector<double>& a, const std::vector<double>& b,
                     std::size_t h, std::size_t w) {
    const std::size_t n = h * w;
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const auto mu_a = filter_valid(a, h, w);
    const auto mu_b = filter_valid(b, h, w);
    const auto m_aa = filter_valid(aa, h, w);
    const auto m_bb = filter_valid(bb, h, w);
    const auto m_ab = filter_valid(ab, h, w);

    double sum_ssim = 0.0, sum_cs = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i], mb = mu_b[i];
        const double va = m_aa[i] - ma * ma;
        const double vb = m_bb[i] - mb * mb;
        const double cov = m_ab[i] - ma * mb;
        const double lum = (2.0 * ma * mb + kC1) / (ma * ma + mb * mb + kC1);
        const double cs = (2.0 * cov + kC2) / (va + vb + kC2);
        sum_ssim += lum * cs;
        sum_cs += cs;
    }
    const double cnt = static_cast<double>(mu_a.size());
    return {sum_ssim / cnt, sum_cs / cnt};
}

std::vector<double> to_f64(const Tensor& t) {
    std::vector<double> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<double>(t[i]);
    return out;
}

void require_image_pair(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rank() != 2 || b.rank() != 2)
        throw ConfigError(std::string(op) + ": rank-2 images required");
    if (!a.same_shape(b)) throw ConfigError(std::string(op) + ": shape mismatch");
}

// (h, w) -> (h/2, w/2) by 2x2 mean; odd trailing row/column dropped.
std::vector<double> downsample2(const std::vector<double>& img, std::size_t h,
                                std::size_t w) {
    const std::size_t oh = h / 2, ow = w / 2;
    std::vector<double> out(oh * ow);
    for (std::size_t r = 0; r < oh; ++r)
        for (std::size_t c = 0; c < ow; ++c)
            out[r * ow + c] = 0.25 * (img[(2 * r) * w + 2 * c] + img[(2 * r) * w + 2 * c + 1] +
                                      img[(2 * r + 1) * w + 2 * c] + img[(2 * r + 1) * w + 2 * c + 1]);
    return out;
}

const double kScaleWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

std::vector<double> rank_with_ties(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0; // average rank, 1-based
        for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
        i = j + 1;
    }
    return rank;
}

} // namespace

double mse(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ConfigError("mse: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

double psnr(const Tensor& a, const Tensor& b, double peak) {
    if (!(peak > 0.0)) throw ConfigError("psnr: peak must be positive");
    const double e = mse(a, b);
    if (e <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / e));
}

double ssim(const Tensor& a, const Tensor& b) {
    require_image_pair(a, b, "ssim");
    if (a.dim(0) < kWin || a.dim(1) < kWin)
        throw ConfigError("ssim: image " + std::to_string(a.dim(0)) + "x" +
                          std::to_string(a.dim(1)) + " smaller than the 11x11 window");
    return ssim_terms(to_f64(a), to_f64(b), a.dim(0), a.dim(1)).ssim;
}

std::size_t max_msssim_scales(const Tensor& a) {
    if (a.rank() != 2) throw ConfigError("msssim: rank-2 images required");
    std::size_t scales = 0;
    std::size_t d = std::min(a.dim(0), a.dim(1));
    while (d >= kWin) {
        ++scales;
        d /= 2;
    }
    return scales;
}

double msssim(const Tensor& a, const Tensor& b, std::size_t scales) {
    require_image_pair(a, b, "msssim");
    if (scales == 0 || scales > 5) throw ConfigError("msssim: scale count must be in [1, 5]");
    const std::size_t feasible = max_msssim_scales(a);
    if (scales > feasible)
        throw ConfigError("msssim: image " + std::to_string(a.dim(0)) + "x" +
                          std::to_string(a.dim(1)) + " supports at most " +
                          std::to_string(feasible) + " scales (requested " +
                          std::to_string(scales) + ")");

    double wsum = 0.0;
    for (std::size_t s = 0; s < scales; ++s) wsum += kScaleWeights[s];

    std::vector<double> fa = to_f64(a), fb = to_f64(b);
    std::size_t h = a.dim(0), w = a.dim(1);
    double result = 1.0;
    for (std::size_t s = 0; s < scales; ++s) {
        const SsimTerms t = ssim_terms(fa, fb, h, w);
        const double term = std::clamp(s + 1 == scales ? t.ssim : t.cs, 0.0, 1.0);
        result *= std::pow(term, kScaleWeights[s] / wsum);
        if (s + 1 < scales) {
            fa = downsample2(fa, h, w);
            fb = downsample2(fb, h, w);
            h /= 2;
            w /= 2;
        }
    }
    return result;
}

AngularProfile angular_profile(const AngularIntensityFn& intensity,
                               const AngularDomain& domain, std::size_t bins) {
    if (bins < 2) throw ConfigError("angular_profile: at least 2 bins required");
    double r_max = 0.0;
    for (std::size_t i = 0; i < domain.n_u; ++i)
        for (std::size_t j = 0; j < domain.n_v; ++j)
            r_max = std::max(r_max, std::hypot(domain.u_center(i), domain.v_center(j)));
    if (r_max <= 0.0) r_max = 1.0;

    AngularProfile p;
    p.radii.resize(bins);
    p.mean_intensity.assign(bins, 0.0);
    p.counts.assign(bins, 0);
    const double width = r_max / static_cast<double>(bins);
    for (std::size_t i = 0; i < bins; ++i)
        p.radii[i] = (static_cast<double>(i) + 0.5) * width;

    for (std::size_t i = 0; i < domain.n_u; ++i)
        for (std::size_t j = 0; j < domain.n_v; ++j) {
            const double u = domain.u_center(i), v = domain.v_center(j);
            const double r = std::hypot(u, v);
            const std::size_t bin =
                std::min(bins - 1, static_cast<std::size_t>(r / width));
            const double val = intensity(u, v);
            if (!std::isfinite(val))
                throw NumericError("angular_profile: non-finite intensity sample");
            p.mean_intensity[bin] += val;
            ++p.counts[bin];
        }

    double peak = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        if (p.counts[i] == 0) {
            p.mean_intensity[i] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        p.mean_intensity[i] /= static_cast<double>(p.counts[i]);
        peak = std::max(peak, p.mean_intensity[i]);
    }
    if (peak > 0.0)
        for (std::size_t i = 0; i < bins; ++i)
            if (p.counts[i] > 0) p.mean_intensity[i] /= peak;
    return p;
}

AngularProfile angular_profile(const LightField& field, std::size_t bins) {
    const Tensor& views = field.views;
    const std::size_t th = views.dim(2), tw = views.dim(3);
    const double inv = 1.0 / static_cast<double>(th * tw);
    const AngularDomain& dom = field.domain;
    auto tile_mean = [&](double u, double v) {
        // recover grid indices from the bin-center angles
        const std::size_t iu = static_cast<std::size_t>(
            std::lround((u - dom.u_min) / dom.u_step() - 0.5));
        const std::size_t iv = static_cast<std::size_t>(
            std::lround((v - dom.v_min) / dom.v_step() - 0.5));
        double acc = 0.0;
        const float* tile = views.data() + ((iu * dom.n_v + iv) * th) * tw;
        for (std::size_t k = 0; k < th * tw; ++k) acc += tile[k];
        return acc * inv;
    };
    return angular_profile(tile_mean, dom, bins);
}

void export_profile_csv(const AngularProfile& profile, const std::string& path) {
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < profile.radii.size(); ++i) {
        if (profile.counts[i] == 0) continue;
        rows.push_back({"r" + std::to_string(i), {profile.mean_intensity[i]}});
    }
    export_csv(path, {"label", "value"}, rows);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ConfigError("spearman: length mismatch");
    if (a.size() < 2) throw ConfigError("spearman: need at least two samples");
    const auto ra = rank_with_ties(a);
    const auto rb = rank_with_ties(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sxy += (ra[i] - ma) * (rb[i] - mb);
        sxx += (ra[i] - ma) * (ra[i] - ma);
        syy += (rb[i] - mb) * (rb[i] - mb);
    }
    if (sxx == 0.0 || syy == 0.0) throw NumericError("spearman: constant input");
    return sxy / std::sqrt(sxx * syy);
}

} // namespace drf
