#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "drf/adam.hpp"
#include "drf/encoding.hpp"
#include "drf/fft_conv.hpp"
#include "drf/inr.hpp"
#include "drf/lightfield.hpp"
#include "drf/loss.hpp"
#include "drf/metrics.hpp"
#include "drf/mlp.hpp"
#include "drf/optics.hpp"

namespace drf {

/// Recovers the scene behind a measurement by Adam descent on the composite
/// loss, starting from zeros. Returns the lowest-loss iterate seen, so the
/// result is never worse than the zero initialization. Constant learning
/// rate, no gradient clipping.
Tensor solve_scene(const ForwardModel& model, const Tensor& y_gt,
                   std::size_t iters, double lr);

/// Per-window analogue of solve_scene across the angular grid: each
/// sub-aperture view is recovered independently from its capture tile.
LightField solve_lightfield(const PsfStack& psfs, const Capture& capture,
                            std::size_t iters, double lr);

/// One training or evaluation example: a capture plus the per-angle PSF
/// stack that produced it (the stack carries the capture's angular window).
struct InrSample {
    Capture capture;
    PsfStack psfs;
};

/// Network and encoder choice. The default is the sinusoidal model; the
/// baseline uses encoder.encode = false with Activation::Relu.
struct ModelSpec {
    EncoderConfig encoder;
    std::vector<std::size_t> hidden{32, 32, 32};
    Activation activation = Activation::Sine;
    double omega0 = 30.0;
};

struct TrainConfig {
    ModelSpec model;
    AdamConfig adam; // total_epochs is overridden by TrainRun::epochs
    LossConfig loss;
    NoiseConfig noise;
};

struct TrainRun {
    std::vector<InrSample> samples;
    std::size_t epochs = 800;
    std::uint64_t seed = 0;
    Channel channel = Channel::G;
    std::string checkpoint_path; // empty: keep in memory only
    std::string loss_csv_path;   // empty: no CSV
};

/// Self-contained trained model: architecture, parameters and the coordinate
/// normalization context (coverage half-extents and tile size).
struct Checkpoint {
    ModelSpec model;
    std::vector<float> theta;
    std::array<double, 2> coverage_deg{0.0, 0.0};
    std::size_t tile_h = 0, tile_w = 0;
    Channel channel = Channel::G;
};

/// Writes <path>.meta.json plus a <path>.theta tensor container; both files
/// are byte-deterministic for a given checkpoint.
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<double> epoch_loss; // mean per-capture loss per epoch
};

/// Trains the coordinate network on the given captures: each epoch visits
/// every capture once in seeded-shuffled order and takes one Adam step per
/// capture on the full measurement objective. RNG streams derive from
/// (seed, channel), so runs for different channels share no state.
TrainResult train_inr(const TrainRun& run, const ApertureGeometry& geometry,
                      const TrainConfig& cfg);

/// Predicted capture image for one sample under a trained model,
/// without coordinate noise.
Tensor predict_capture(const Checkpoint& ck, const InrSample& sample);

struct EvalRow {
    double display_x = 0.0, display_y = 0.0;
    std::size_t aperture_index = 0;
    double psnr_db = 0.0, ssim_val = 0.0, msssim_val = 0.0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    double mean_psnr = 0.0, mean_ssim = 0.0, mean_msssim = 0.0;
    std::size_t msssim_scales = 0; // scales feasible at this capture size
};

/// Scores predicted versus measured captures per sample (PSNR / SSIM /
/// MS-SSIM with as many scales as the image size allows, up to 5).
EvalReport evaluate_model(const Checkpoint& ck, const std::vector<InrSample>& held_out);

/// Deterministic report files for one or more named model variants.
void write_eval_report_json(const std::string& path,
                            const std::vector<std::pair<std::string, EvalReport>>& models);
void write_eval_report_csv(const std::string& path,
                           const std::vector<std::pair<std::string, EvalReport>>& models);

/// Radiance view of a trained model. x, y are normalized panel coordinates
/// in [0, 1]; u, v are angles in degrees; s, t are already-normalized
/// sub-view coordinates in [-1, 1] (0 is the tile center).
RadianceFn checkpoint_radiance(const Checkpoint& ck);

/// Direction-only intensity of a trained model at one display position:
/// the mean network output over the checkpoint's tile grid.
AngularIntensityFn checkpoint_intensity(const Checkpoint& ck, double display_x,
                                        double display_y);

} // namespace drf
