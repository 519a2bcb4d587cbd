#include "drf/cli.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "drf/config.hpp"
#include "drf/dataset.hpp"
#include "drf/errors.hpp"
#include "drf/metrics.hpp"
#include "drf/solvers.hpp"
#include "drf/tensor_io.hpp"

namespace drf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Wall-clock sidecar next to the deterministic outputs; never part of them.
void write_timings(const std::string& path, const std::string& command,
                   const std::vector<std::pair<std::string, double>>& phases) {
    json j;
    j["command"] = command;
    for (const auto& [name, secs] : phases) j["seconds"][name] = secs;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (out) out << j.dump(2) << "\n";
}

struct CommonArgs {
    std::string config_path;
    std::string out;
    std::string channel;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool force = false;
};

RunConfig effective_config(const CommonArgs& args) {
    RunConfig cfg = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    cfg.validate();
    return cfg;
}

std::vector<Channel> selected_channels(const RunConfig& cfg, const std::string& filter) {
    if (filter.empty()) return cfg.capture.channels;
    const Channel ch = channel_from_name(filter);
    for (Channel c : cfg.capture.channels)
        if (c == ch) return {ch};
    throw ConfigError("channel " + filter + " is not in the config's channel list");
}

std::string default_path(const RunConfig& cfg, const std::string& leaf) {
    return (fs::path(cfg.out_dir) / leaf).string();
}

/// "render.png" -> "render_mask.png".
std::string mask_path(const std::string& image_path) {
    fs::path p(image_path);
    fs::path stem = p.parent_path() / p.stem();
    return stem.string() + "_mask" + p.extension().string();
}

const DatasetRecord& find_record(const DatasetManifest& m, std::size_t position,
                                 std::size_t aperture, Channel channel) {
    for (const DatasetRecord& r : m.records)
        if (r.position_index == position && r.aperture_index == aperture &&
            r.channel == channel)
            return r;
    throw ConfigError("dataset has no record for position " + std::to_string(position) +
                      ", aperture " + std::to_string(aperture) + ", channel " +
                      channel_name(channel));
}

/// The data-defining config groups must agree between a CLI config and the
/// manifest that produced a dataset; training hyperparameters may differ.
void require_dataset_match(const RunConfig& cli, const RunConfig& manifest) {
    const json a = json::parse(config_to_json_text(cli));
    const json b = json::parse(config_to_json_text(manifest));
    for (const char* group : {"geometry", "tiling", "capture", "emission"})
        if (a.at(group) != b.at(group))
            throw ConfigError(std::string("config group '") + group +
                              "' does not match the dataset manifest");
}

ModelSpec variant_spec(const RunConfig& cfg, const std::string& variant) {
    ModelSpec spec = cfg.model;
    if (variant == "vanilla") {
        spec.encoder.encode = false;
        spec.activation = Activation::Relu;
    }
    return spec;
}

std::vector<InrSample> load_split(const std::string& dir, const DatasetManifest& m,
                                  Channel channel, bool held_out) {
    std::vector<InrSample> samples;
    for (const DatasetRecord& r : m.records)
        if (r.channel == channel && is_held_out(r) == held_out)
            samples.push_back(load_sample(dir, m, r));
    return samples;
}

// ---------------------------------------------------------------------------

struct SimulateArgs : CommonArgs {};

int cmd_simulate(const SimulateArgs& args) {
    Stopwatch watch;
    RunConfig cfg = effective_config(args);
    cfg.capture.channels = selected_channels(cfg, args.channel);
    const std::string dir = args.out.empty() ? default_path(cfg, "dataset") : args.out;
    write_dataset(cfg, dir, args.force);
    const DatasetManifest m = read_manifest(dir);
    std::cout << "wrote " << m.records.size() << " captures ("
              << cfg.capture.channels.size() << " channel(s)) to " << dir << "\n";
    write_timings((fs::path(dir) / "timings.json").string(), "simulate",
                  {{"total", watch.seconds()}});
    return 0;
}

struct SolveSceneArgs : CommonArgs {
    std::string psf, measurement;
    std::size_t iters = 0; // 0: take the config value
    double lr = 0.0;
};

int cmd_solve_scene(const SolveSceneArgs& args) {
    Stopwatch watch;
    const RunConfig cfg = effective_config(args);
    const std::size_t iters = args.iters ? args.iters : cfg.solver.iters;
    const double lr = args.lr > 0.0 ? args.lr : cfg.solver.lr;

    const Tensor psf = load_tensor(args.psf);
    const Tensor y = load_tensor(args.measurement);
    if (psf.rank() != 2 || y.rank() != 2)
        throw ConfigError("solve-scene expects rank-2 PSF and measurement containers");
    const ForwardModel model(psf, y.dim(0), y.dim(1));
    const Tensor rec = solve_scene(model, y, iters, lr);

    const std::string out = args.out.empty() ? default_path(cfg, "scene") : args.out;
    save_tensor(rec, out);
    export_image(rec, out + ".png", true);
    std::cout << "wrote " << out << " (" << rec.dim(0) << "x" << rec.dim(1) << ", " << iters
              << " iterations)\n";
    write_timings(out + ".timings.json", "solve-scene", {{"total", watch.seconds()}});
    return 0;
}

struct SolveLfArgs : CommonArgs {
    std::string dataset;
    std::size_t position = 0, aperture = 0;
    std::size_t iters = 0;
    double lr = 0.0;
};

int cmd_solve_lf(const SolveLfArgs& args) {
    Stopwatch watch;
    const RunConfig base = effective_config(args);
    const std::string dir = args.dataset.empty() ? default_path(base, "dataset") : args.dataset;
    const DatasetManifest m = read_manifest(dir);
    if (!args.config_path.empty()) require_dataset_match(base, m.config);

    const Channel channel = args.channel.empty() ? m.config.capture.channels.front()
                                                 : channel_from_name(args.channel);
    const DatasetRecord& record = find_record(m, args.position, args.aperture, channel);
    const InrSample sample = load_sample(dir, m, record);

    const std::size_t iters = args.iters ? args.iters : m.config.solver.iters;
    const double lr = args.lr > 0.0 ? args.lr : m.config.solver.lr;
    const LightField lf = solve_lightfield(sample.psfs, sample.capture, iters, lr);

    const std::string out =
        args.out.empty()
            ? default_path(base, "lightfield_p" + std::to_string(args.position) + "_a" +
                                     std::to_string(args.aperture) + "_" +
                                     channel_name(channel))
            : args.out;
    save_tensor(lf.views, out);
    export_image(assemble_subapertures(lf.views), out + ".png", true);
    std::cout << "wrote " << out << " (" << lf.views.dim(0) << "x" << lf.views.dim(1)
              << " views, " << iters << " iterations)\n";
    write_timings(out + ".timings.json", "solve-lf", {{"total", watch.seconds()}});
    return 0;
}

struct TrainArgs : CommonArgs {
    std::string dataset;
    std::string variant = "both"; // ours | vanilla | both
};

int cmd_train(const TrainArgs& args) {
    Stopwatch watch;
    const RunConfig base = effective_config(args);
    const std::string dir = args.dataset.empty() ? default_path(base, "dataset") : args.dataset;
    const DatasetManifest m = read_manifest(dir);
    if (!args.config_path.empty()) require_dataset_match(base, m.config);

    // data comes from the manifest; hyperparameters from the CLI config
    RunConfig cfg = args.config_path.empty() ? m.config : base;
    if (args.seed_set) cfg.seed = args.seed;

    std::vector<std::string> variants;
    if (args.variant == "both")
        variants = {"ours", "vanilla"};
    else if (args.variant == "ours" || args.variant == "vanilla")
        variants = {args.variant};
    else
        throw ConfigError("unknown model variant '" + args.variant +
                          "' (expected ours, vanilla or both)");

    const std::string out_dir = args.out.empty() ? default_path(cfg, "models") : args.out;
    fs::create_directories(out_dir);

    std::vector<std::pair<std::string, double>> phases;
    for (Channel channel : selected_channels(cfg, args.channel)) {
        std::vector<InrSample> samples = load_split(dir, m, channel, false);
        if (samples.empty())
            throw ConfigError("dataset has no training captures for channel " +
                              channel_name(channel));
        for (const std::string& variant : variants) {
            Stopwatch phase;
            const std::string stem = variant + "_" + channel_name(channel);
            TrainRun run;
            run.samples = samples;
            run.epochs = cfg.optimizer.total_epochs;
            run.seed = cfg.seed;
            run.channel = channel;
            run.checkpoint_path = (fs::path(out_dir) / stem).string();
            run.loss_csv_path = (fs::path(out_dir) / (stem + "_loss.csv")).string();

            TrainConfig tc;
            tc.model = variant_spec(cfg, variant);
            tc.adam = cfg.optimizer;
            tc.loss = cfg.loss;
            tc.noise = cfg.coord_noise;

            const TrainResult result = train_inr(run, cfg.geometry, tc);
            std::cout << "trained " << stem << ": " << run.epochs << " epochs, final loss "
                      << result.epoch_loss.back() << "\n";
            phases.emplace_back(stem, phase.seconds());
        }
    }
    phases.emplace_back("total", watch.seconds());
    write_timings((fs::path(out_dir) / "timings.json").string(), "train", phases);
    return 0;
}

struct RenderArgs : CommonArgs {
    std::string checkpoint;
    std::vector<double> camera; // empty: take the config value
};

int cmd_render(const RenderArgs& args) {
    Stopwatch watch;
    const RunConfig cfg = effective_config(args);
    const Checkpoint ck = load_checkpoint(args.checkpoint);
    std::array<double, 3> camera = cfg.render.camera;
    if (!args.camera.empty()) {
        if (args.camera.size() != 3)
            throw ConfigError("--camera expects exactly three values: X Y Z");
        camera = {args.camera[0], args.camera[1], args.camera[2]};
    }
    if (camera[2] <= 0.0) throw ConfigError("camera z must be positive (in front of the panel)");

    const RenderResult rr =
        render_view(checkpoint_radiance(ck), camera, cfg.geometry.panel_width,
                    cfg.geometry.panel_height, ck.coverage_deg, cfg.render.height,
                    cfg.render.width);
    const std::string out = args.out.empty() ? default_path(cfg, "render.png") : args.out;
    if (!fs::path(out).parent_path().empty()) fs::create_directories(fs::path(out).parent_path());
    export_image(rr.image, out, false);
    export_image(rr.mask, mask_path(out), false);
    std::cout << "wrote " << out << " and " << mask_path(out) << " (" << cfg.render.width << "x"
              << cfg.render.height << ")\n";
    write_timings(out + ".timings.json", "render", {{"total", watch.seconds()}});
    return 0;
}

struct ProfileArgs : CommonArgs {
    std::string checkpoint;
    std::string dataset;
};

int cmd_profile(const ProfileArgs& args) {
    Stopwatch watch;
    if (args.checkpoint.empty() == args.dataset.empty())
        throw ConfigError("profile needs exactly one of --checkpoint or --dataset");

    RunConfig cfg = effective_config(args);
    AngularIntensityFn intensity;
    std::array<double, 2> coverage{0.0, 0.0};
    if (!args.checkpoint.empty()) {
        const Checkpoint ck = load_checkpoint(args.checkpoint);
        coverage = ck.coverage_deg;
        intensity = checkpoint_intensity(ck, 0.5, 0.5);
    } else {
        const DatasetManifest m = read_manifest(args.dataset);
        cfg = m.config;
        const auto span = total_coverage(cfg.geometry);
        coverage = {span.first, span.second};
        const DisplayEmissionModel em = cfg.emission;
        intensity = [em](double u, double v) { return emission(em, u, v); };
    }

    const AngularDomain dom(-0.5 * coverage[0], 0.5 * coverage[0], -0.5 * coverage[1],
                            0.5 * coverage[1], cfg.profile.grid, cfg.profile.grid);
    const AngularProfile profile = angular_profile(intensity, dom, cfg.profile.bins);
    const std::string out = args.out.empty() ? default_path(cfg, "profile.csv") : args.out;
    if (!fs::path(out).parent_path().empty()) fs::create_directories(fs::path(out).parent_path());
    export_profile_csv(profile, out);
    std::cout << "wrote " << out << " (" << cfg.profile.bins << " bins over "
              << coverage[0] << "x" << coverage[1] << " deg)\n";
    write_timings(out + ".timings.json", "profile", {{"total", watch.seconds()}});
    return 0;
}

struct EvalArgs : CommonArgs {
    std::string dataset;
    std::string models;
};

int cmd_eval(const EvalArgs& args) {
    Stopwatch watch;
    const RunConfig base = effective_config(args);
    const std::string dir = args.dataset.empty() ? default_path(base, "dataset") : args.dataset;
    const DatasetManifest m = read_manifest(dir);
    if (!args.config_path.empty()) require_dataset_match(base, m.config);
    const RunConfig& cfg = args.config_path.empty() ? m.config : base;

    const std::string models_dir = args.models.empty() ? default_path(cfg, "models") : args.models;
    std::vector<std::pair<std::string, EvalReport>> reports;
    for (Channel channel : selected_channels(cfg, args.channel)) {
        const std::vector<InrSample> held = load_split(dir, m, channel, true);
        if (held.empty())
            throw ConfigError("dataset has no held-out captures for channel " +
                              channel_name(channel));
        for (const char* variant : {"ours", "vanilla"}) {
            const std::string stem = std::string(variant) + "_" + channel_name(channel);
            const fs::path ck_path = fs::path(models_dir) / stem;
            if (!fs::exists(ck_path.string() + ".meta.json"))
                throw IoError("eval: missing checkpoint '" + ck_path.string() +
                              "' for channel " + channel_name(channel));
            const Checkpoint ck = load_checkpoint(ck_path.string());
            reports.emplace_back(stem, evaluate_model(ck, held));
        }
    }

    const std::string out_dir = args.out.empty() ? default_path(cfg, "eval") : args.out;
    fs::create_directories(out_dir);
    const std::string json_path = (fs::path(out_dir) / "report.json").string();
    const std::string csv_path = (fs::path(out_dir) / "report.csv").string();
    write_eval_report_json(json_path, reports);
    write_eval_report_csv(csv_path, reports);
    for (const auto& [name, report] : reports)
        std::cout << name << ": mean psnr " << report.mean_psnr << " dB, ssim "
                  << report.mean_ssim << ", ms-ssim " << report.mean_msssim << "\n";
    std::cout << "wrote " << json_path << " and " << csv_path << "\n";
    write_timings((fs::path(out_dir) / "timings.json").string(), "eval",
                  {{"total", watch.seconds()}});
    return 0;
}

// ---------------------------------------------------------------------------

void add_common(CLI::App* sub, CommonArgs& args, bool with_channel) {
    sub->add_option("--config", args.config_path, "JSON config file (defaults when omitted)");
    sub->add_option("--seed", args.seed, "Override the config seed")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", args.out, "Output path (default: under the config's out_dir)");
    if (with_channel)
        sub->add_option("--channel", args.channel, "Restrict to one channel: R, G or B");
}

std::string config_reference() {
    return "Configuration file: a single JSON document; every key is optional and "
           "falls back to the built-in default. Unknown keys are rejected.\n"
           "Defaults:\n" +
           config_to_json_text(RunConfig{}) +
           "Groups: geometry (aperture layout, mm), emission (synthetic display "
           "radiance), capture (sensor noise and channels), tiling (angular grid and "
           "window size), encoder (sinusoidal feature levels per coordinate group), "
           "model (network), coord_noise (training-time coordinate jitter), optimizer "
           "(Adam and epoch count), loss (data/range weights), solver (direct inverse "
           "solves), profile (angular profile sampling), render (novel-view image).\n"
           "DRF_THREADS caps worker threads (default 1; results are identical at any "
           "setting).\nExit codes: 0 success, 1 usage or file error, 2 numeric error.";
}

} // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"drf: display radiance fields through a lensless aperture camera — "
                 "simulate captures, invert them, train and query the implicit model"};
    app.require_subcommand(1);
    app.footer(config_reference());

    SimulateArgs simulate_args;
    CLI::App* simulate =
        app.add_subcommand("simulate", "Write the synthetic capture dataset with its manifest");
    add_common(simulate, simulate_args, true);
    simulate->add_flag("--force", simulate_args.force,
                       "Write into a non-empty output directory");
    simulate->footer(config_reference());

    SolveSceneArgs scene_args;
    CLI::App* solve_scene = app.add_subcommand(
        "solve-scene", "Recover a scene from one measurement and its system PSF");
    add_common(solve_scene, scene_args, false);
    solve_scene->add_option("--psf", scene_args.psf, "PSF tensor container stem")->required();
    solve_scene
        ->add_option("--measurement", scene_args.measurement, "Measurement container stem")
        ->required();
    solve_scene->add_option("--iters", scene_args.iters, "Solver iterations (config default)");
    solve_scene->add_option("--lr", scene_args.lr, "Solver learning rate (config default)");
    solve_scene->footer(config_reference());

    SolveLfArgs lf_args;
    CLI::App* solve_lf = app.add_subcommand(
        "solve-lf", "Recover the per-angle light field of one dataset capture");
    add_common(solve_lf, lf_args, true);
    solve_lf->add_option("--dataset", lf_args.dataset, "Dataset directory (default out_dir/dataset)");
    solve_lf->add_option("--position", lf_args.position, "Display position index 0..8")
        ->required();
    solve_lf->add_option("--aperture", lf_args.aperture, "Aperture index")->required();
    solve_lf->add_option("--iters", lf_args.iters, "Solver iterations (config default)");
    solve_lf->add_option("--lr", lf_args.lr, "Solver learning rate (config default)");
    solve_lf->footer(config_reference());

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand(
        "train", "Train the coordinate network per channel (ours and/or the relu baseline)");
    add_common(train, train_args, true);
    train->add_option("--dataset", train_args.dataset, "Dataset directory (default out_dir/dataset)");
    train->add_option("--model", train_args.variant, "Variant: ours, vanilla or both");
    train->footer(config_reference());

    RenderArgs render_args;
    CLI::App* render =
        app.add_subcommand("render", "Render the panel from a camera position (plus mask)");
    add_common(render, render_args, false);
    render->add_option("--checkpoint", render_args.checkpoint, "Checkpoint stem")->required();
    render->add_option("--camera", render_args.camera, "Camera X Y Z in mm")->expected(3);
    render->footer(config_reference());

    ProfileArgs profile_args;
    CLI::App* profile = app.add_subcommand(
        "profile", "Export the angular intensity profile of a model or a dataset's emission");
    add_common(profile, profile_args, false);
    profile->add_option("--checkpoint", profile_args.checkpoint, "Checkpoint stem");
    profile->add_option("--dataset", profile_args.dataset, "Dataset directory");
    profile->footer(config_reference());

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand(
        "eval", "Score trained variants on the held-out captures (report.json/report.csv)");
    add_common(eval, eval_args, true);
    eval->add_option("--dataset", eval_args.dataset, "Dataset directory (default out_dir/dataset)");
    eval->add_option("--models", eval_args.models, "Checkpoint directory (default out_dir/models)");
    eval->footer(config_reference());

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }

    simulate_args.seed_set = simulate->count("--seed") > 0;
    scene_args.seed_set = solve_scene->count("--seed") > 0;
    lf_args.seed_set = solve_lf->count("--seed") > 0;
    train_args.seed_set = train->count("--seed") > 0;
    render_args.seed_set = render->count("--seed") > 0;
    profile_args.seed_set = profile->count("--seed") > 0;
    eval_args.seed_set = eval->count("--seed") > 0;

    try {
        if (simulate->parsed()) return cmd_simulate(simulate_args);
        if (solve_scene->parsed()) return cmd_solve_scene(scene_args);
        if (solve_lf->parsed()) return cmd_solve_lf(lf_args);
        if (train->parsed()) return cmd_train(train_args);
        if (render->parsed()) return cmd_render(render_args);
        if (profile->parsed()) return cmd_profile(profile_args);
        if (eval->parsed()) return cmd_eval(eval_args);
    } catch (const NumericError& e) {
        std::cerr << json{{"error", {{"kind", "numeric"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << json{{"error", {{"kind", "config"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << json{{"error", {{"kind", "io"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
    return 0;
}

} // namespace drf
