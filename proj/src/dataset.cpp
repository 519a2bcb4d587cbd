#include "drf/dataset.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "drf/errors.hpp"
#include "drf/tensor_io.hpp"

namespace drf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kTextureStream = 1;
constexpr std::uint64_t kNoiseStreamBase = 100;
constexpr std::size_t kGridPositions = 9;

std::string timestamp_utc() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("dataset: cannot write '" + path.string() + "'");
    out << text;
}

AngularDomain record_domain(const DatasetRecord& r, const TilingConfig& t) {
    return AngularDomain(r.window.u_lo, r.window.u_hi, r.window.v_lo, r.window.v_hi,
                         t.n_u, t.n_v);
}

} // namespace

std::array<double, 2> grid_position(std::size_t position_index) {
    if (position_index >= kGridPositions)
        throw ConfigError("dataset: position index " + std::to_string(position_index) +
                          " outside the 3x3 grid");
    return {0.5 * static_cast<double>(position_index % 3),
            0.5 * static_cast<double>(position_index / 3)};
}

void write_dataset(const RunConfig& cfg, const std::string& dir, bool force) {
    cfg.validate();
    const fs::path root(dir);
    if (fs::exists(root) && !fs::is_empty(root) && !force)
        throw IoError("dataset: directory '" + dir + "' is not empty (pass --force to reuse)");
    fs::create_directories(root);

    const std::size_t apertures = cfg.geometry.aperture_centers.size();
    const std::size_t channels = cfg.capture.channels.size();
    std::vector<DatasetRecord> records;
    records.reserve(kGridPositions * apertures * channels);

    std::uint64_t noise_stream = kNoiseStreamBase;
    for (std::size_t p = 0; p < kGridPositions; ++p) {
        const std::array<double, 2> pos = grid_position(p);
        const double px_mm = (pos[0] - 0.5) * cfg.geometry.panel_width;
        const double py_mm = (pos[1] - 0.5) * cfg.geometry.panel_height;
        for (std::size_t a = 0; a < apertures; ++a) {
            const AngleRange window = incident_angle_range_at(cfg.geometry, a, px_mm, py_mm);
            const AngularDomain dom(window.u_lo, window.u_hi, window.v_lo, window.v_hi,
                                    cfg.tiling.n_u, cfg.tiling.n_v);
            const PsfStack psfs =
                synth_psf_stack(cfg.geometry, dom, cfg.tiling.win_h, cfg.tiling.win_w,
                                RngStream(cfg.seed, kTextureStream));
            const std::string psf_stem =
                "psf_p" + std::to_string(p) + "_a" + std::to_string(a);
            save_tensor(psfs.patches, (root / psf_stem).string());

            for (Channel ch : cfg.capture.channels) {
                Capture cap = simulate_capture(cfg.geometry, dom, psfs, cfg.emission,
                                               {pos[0], pos[1]}, a, cfg.capture.noise_sigma,
                                               RngStream(cfg.seed, noise_stream++));
                cap.channel = ch;
                const std::string cap_stem = "capture_p" + std::to_string(p) + "_a" +
                                             std::to_string(a) + "_" + channel_name(ch);
                save_tensor(cap.image, (root / cap_stem).string());

                DatasetRecord r;
                r.file = cap_stem;
                r.psf_file = psf_stem;
                r.position_index = p;
                r.aperture_index = a;
                r.channel = ch;
                r.display_x = pos[0];
                r.display_y = pos[1];
                r.window = window;
                records.push_back(std::move(r));
            }
        }
    }

    const auto coverage = total_coverage(cfg.geometry);
    json emission;
    emission["coverage_deg"] = {coverage.first, coverage.second};
    emission["model"] = {{"falloff_exponent", cfg.emission.falloff_exponent},
                         {"anisotropy_h", cfg.emission.anisotropy_h},
                         {"anisotropy_v", cfg.emission.anisotropy_v},
                         {"spatial_spread_sigma", cfg.emission.spatial_spread_sigma},
                         {"peak_intensity", cfg.emission.peak_intensity}};
    write_text(root / "emission.json", emission.dump(2) + "\n");

    json manifest;
    manifest["config"] = json::parse(config_to_json_text(cfg));
    manifest["meta"] = {{"created", timestamp_utc()}, {"format", 1}};
    json& list = manifest["records"];
    list = json::array();
    for (const DatasetRecord& r : records) {
        list.push_back({{"file", r.file},
                        {"psf_file", r.psf_file},
                        {"position_index", r.position_index},
                        {"aperture_index", r.aperture_index},
                        {"channel", channel_name(r.channel)},
                        {"display", {r.display_x, r.display_y}},
                        {"window_deg",
                         {r.window.u_lo, r.window.u_hi, r.window.v_lo, r.window.v_hi}}});
    }
    write_text(root / "manifest.json", manifest.dump(2) + "\n");
}

DatasetManifest read_manifest(const std::string& dir) {
    fs::path path(dir);
    if (fs::is_directory(path)) path /= "manifest.json";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("manifest: cannot open '" + path.string() + "'");

    DatasetManifest m;
    try {
        json root;
        in >> root;
        m.config = config_from_json_text(root.at("config").dump());
        for (const json& e : root.at("records")) {
            DatasetRecord r;
            r.file = e.at("file").get<std::string>();
            r.psf_file = e.at("psf_file").get<std::string>();
            r.position_index = e.at("position_index").get<std::size_t>();
            r.aperture_index = e.at("aperture_index").get<std::size_t>();
            r.channel = channel_from_name(e.at("channel").get<std::string>());
            r.display_x = e.at("display").at(0).get<double>();
            r.display_y = e.at("display").at(1).get<double>();
            r.window.u_lo = e.at("window_deg").at(0).get<double>();
            r.window.u_hi = e.at("window_deg").at(1).get<double>();
            r.window.v_lo = e.at("window_deg").at(2).get<double>();
            r.window.v_hi = e.at("window_deg").at(3).get<double>();
            m.records.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw IoError("manifest: malformed '" + path.string() + "': " + e.what());
    }

    const std::size_t apertures = m.config.geometry.aperture_centers.size();
    for (const DatasetRecord& r : m.records) {
        if (r.position_index >= kGridPositions || r.aperture_index >= apertures)
            throw IoError("manifest: record '" + r.file + "' indexes outside the grid");
    }
    return m;
}

InrSample load_sample(const std::string& dir, const DatasetManifest& manifest,
                      const DatasetRecord& record) {
    const fs::path root(dir);
    const TilingConfig& t = manifest.config.tiling;

    Tensor patches = load_tensor((root / record.psf_file).string());
    if (patches.rank() != 4 || patches.dim(0) != t.n_u || patches.dim(1) != t.n_v ||
        patches.dim(2) != t.win_h || patches.dim(3) != t.win_w)
        throw IoError("dataset: PSF container '" + record.psf_file +
                      "' does not match the manifest tiling");

    Tensor image = load_tensor((root / record.file).string());
    if (image.rank() != 2 || image.dim(0) != t.n_u * t.win_h ||
        image.dim(1) != t.n_v * t.win_w)
        throw IoError("dataset: capture container '" + record.file +
                      "' does not match the manifest tiling");

    InrSample s;
    s.psfs = PsfStack(std::move(patches), record_domain(record, t));
    s.capture.image = std::move(image);
    s.capture.display_x = record.display_x;
    s.capture.display_y = record.display_y;
    s.capture.aperture_index = record.aperture_index;
    s.capture.channel = record.channel;
    return s;
}

bool is_held_out(const DatasetRecord& record) {
    return record.position_index == 4 || record.aperture_index == 2;
}

} // namespace drf
