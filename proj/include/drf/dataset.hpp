#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "drf/config.hpp"
#include "drf/optics.hpp"
#include "drf/solvers.hpp"

namespace drf {

/// One capture file in a dataset, keyed by display position (3x3 grid,
/// row-major), aperture and channel. Paths are container stems relative to
/// the dataset directory.
struct DatasetRecord {
    std::string file;     // capture container stem
    std::string psf_file; // PSF stack container stem (shared across channels)
    std::size_t position_index = 0; // iy * 3 + ix
    std::size_t aperture_index = 0;
    Channel channel = Channel::G;
    double display_x = 0.0, display_y = 0.0; // normalized [0,1]
    AngleRange window; // incident-angle window in degrees
};

struct DatasetManifest {
    RunConfig config;
    std::vector<DatasetRecord> records;
};

/// Display position of the simulation grid: normalized {0, 0.5, 1}^2,
/// row-major in (iy, ix).
std::array<double, 2> grid_position(std::size_t position_index);

/// Simulates the full 3x3-position x aperture x channel dataset into `dir`:
/// one PSF stack per (position, aperture), one capture per record, a
/// ground-truth emission.json and a manifest.json. Every PSF stack grows
/// from the same diffuser-texture stream; each capture gets its own noise
/// stream. Refuses a non-empty directory unless force is set.
void write_dataset(const RunConfig& cfg, const std::string& dir, bool force);

/// Loads <dir>/manifest.json (or a manifest path directly). Throws IoError
/// on missing or malformed files.
DatasetManifest read_manifest(const std::string& dir);

/// Materializes one record: the capture image plus its PSF stack with the
/// angular window restored from the manifest.
InrSample load_sample(const std::string& dir, const DatasetManifest& manifest,
                      const DatasetRecord& record);

/// Evaluation split: the center display position (index 4) and aperture
/// index 2 (the middle of the default layout) are held out; the remaining
/// records train.
bool is_held_out(const DatasetRecord& record);

} // namespace drf
