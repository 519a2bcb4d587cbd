#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "drf/encoding.hpp"
#include "drf/lightfield.hpp"
#include "drf/optics.hpp"
#include "drf/solvers.hpp"

namespace drf {

/// Sub-aperture decomposition: an n_u x n_v angular grid of win_h x win_w
/// sensor tiles. Synthetic PSF patches share the tile size.
struct TilingConfig {
    std::size_t n_u = 9, n_v = 9;
    std::size_t win_h = 54, win_w = 70;
};

struct CaptureConfig {
    double noise_sigma = 0.01;
    std::vector<Channel> channels{Channel::R, Channel::G, Channel::B};
};

/// Iteration budget for the direct inverse solvers.
struct SolveConfig {
    std::size_t iters = 500;
    double lr = 5e-3;
};

struct ProfileConfig {
    std::size_t bins = 16;
    std::size_t grid = 33; // angular samples per axis when profiling a model
};

struct RenderConfig {
    std::size_t width = 192, height = 128;
    std::array<double, 3> camera{0.0, 0.0, 600.0}; // mm from the panel center
};

/// One document controlling every command. Loaded from JSON with strict
/// unknown-key rejection so a typo cannot silently fall back to a default.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    ApertureGeometry geometry = default_geometry();
    DisplayEmissionModel emission;
    CaptureConfig capture;
    TilingConfig tiling;
    ModelSpec model; // the JSON "encoder" group fills model.encoder
    NoiseConfig coord_noise;
    AdamConfig optimizer; // total_epochs doubles as the training epoch count
    LossConfig loss;
    SolveConfig solver;
    ProfileConfig profile;
    RenderConfig render;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Parses a JSON document. Absent keys keep their defaults; unknown keys
/// throw ConfigError naming the dotted path. The result is validated.
RunConfig config_from_json_text(const std::string& text);

/// Reads and parses a config file. Throws IoError when the file is missing
/// or unreadable.
RunConfig load_config(const std::string& path);

/// Serializes the full effective config (sorted keys, two-space indent,
/// trailing newline). config_from_json_text inverts it.
std::string config_to_json_text(const RunConfig& cfg);

} // namespace drf
