// Acceptance gate: every shipped guarantee verified end to end, one verdict
// line per criterion. Exits with the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "drf/config.hpp"
#include "drf/dataset.hpp"
#include "drf/inr.hpp"
#include "drf/metrics.hpp"
#include "drf/solvers.hpp"
#include "drf/tensor_io.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using drf::Tensor;
using nlohmann::json;

namespace {

int g_failures = 0;

void report(bool pass, const char* name, const std::string& detail) {
    if (!pass) ++g_failures;
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* format, ...) {
    va_list args;
    va_start(args, format);
    char buf[512];
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// --- shared CLI workspace --------------------------------------------------

const std::string& workspace() {
    static const std::string ws = [] {
        const fs::path p = fs::temp_directory_path() / "drf_acceptance";
        fs::remove_all(p);
        fs::create_directories(p);
        return p.string();
    }();
    return ws;
}

std::string ws_path(const std::string& leaf) { return (fs::path(workspace()) / leaf).string(); }

// Reduced-scale run for the end-to-end criteria: full 3x3 x 5-aperture grid,
// fourth-power emission falloff, sensor noise 0.01, 8x8 tiles on a 3x3
// angular grid, 80 training epochs.
const char* kEndToEndConfig = R"({
  "seed": 11,
  "geometry": {"sensor_px_per_mm": 0.8},
  "emission": {"spatial_spread_sigma": 1.5},
  "capture": {"noise_sigma": 0.01, "channels": ["G"]},
  "tiling": {"n_u": 3, "n_v": 3, "win_h": 8, "win_w": 8},
  "optimizer": {"epochs": 80},
  "profile": {"bins": 8, "grid": 21}
})";

const std::string& config_path() {
    static const std::string path = [] {
        const std::string p = ws_path("acceptance.json");
        std::ofstream out(p, std::ios::binary);
        out << kEndToEndConfig;
        return p;
    }();
    return path;
}

/// Runs the drf binary; returns its exit code (-1 when unavailable).
int run_drf(const std::string& args, const std::string& log_leaf) {
    const char* bin = std::getenv("DRF_BIN");
    if (!bin) return -1;
    const std::string cmd = std::string("\"") + bin + "\" " + args + " >\"" +
                            ws_path(log_leaf) + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, double> read_profile_csv(const std::string& path) {
    std::map<std::string, double> rows;
    const std::string text = read_file(path);
    std::size_t pos = text.find("\r\n"); // skip header
    while (pos != std::string::npos) {
        pos += 2;
        const std::size_t end = text.find("\r\n", pos);
        if (end == std::string::npos) break;
        const std::string line = text.substr(pos, end - pos);
        const std::size_t comma = line.find(',');
        if (comma != std::string::npos)
            rows[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
        pos = end;
    }
    return rows;
}

// --- criteria --------------------------------------------------------------

void criterion_1_convolution() {
    Stopwatch watch;
    drf::RngStream rng(1001, 0);
    double max_err = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t ah = 1 + rng.below(32), aw = 1 + rng.below(32);
        const std::size_t bh = 1 + rng.below(16), bw = 1 + rng.below(16);
        Tensor a({ah, aw}), b({bh, bw});
        for (std::size_t i = 0; i < a.size(); ++i)
            a[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
        for (std::size_t i = 0; i < b.size(); ++i)
            b[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
        const Tensor fft = drf::conv2d_linear(a, b);
        const auto ref = oracle::conv_full_direct(a.values(), ah, aw, b.values(), bh, bw);
        for (std::size_t i = 0; i < ref.size(); ++i)
            max_err = std::max(max_err,
                               std::fabs(static_cast<double>(fft[i]) - ref[i]));
    }
    const double secs = watch.seconds();
    report(max_err <= 1e-5 && secs < 10.0, "1 convolution-oracle",
           fmt("200 instances, max_abs_err=%.2e (<=1e-5), %.1fs (<10s)", max_err, secs));
}

void criterion_2_gradient() {
    Stopwatch watch;
    const drf::EncoderConfig enc; // levels 1/5/10 -> width 64
    drf::Mlp<double> net(
        drf::MlpConfig{drf::encoded_width(enc), {32, 32, 32}, drf::Activation::Sine, 30.0});
    net.init(drf::RngStream(1002, 0));

    const drf::AngularDomain dom(-10.0, 10.0, -8.0, 8.0, 3, 3);
    drf::CaptureBatch<double> b;
    b.grid = {3, 3, 8, 8, 8, 8};
    b.features = drf::encode_rows(enc, drf::inr_coords<double>(dom, 8, 8, 0.5, 0.5, 23.3, 18.8));
    drf::RngStream rng(1003, 0);
    b.psf.resize(b.grid.psf_size());
    for (std::size_t w = 0; w < b.grid.windows(); ++w) {
        double sum = 0.0;
        for (std::size_t i = 0; i < 64; ++i) {
            b.psf[w * 64 + i] = rng.uniform(0.0, 1.0);
            sum += b.psf[w * 64 + i];
        }
        for (std::size_t i = 0; i < 64; ++i) b.psf[w * 64 + i] /= sum;
    }
    // offset targets keep the L1 term away from its kink for every pixel
    {
        const std::size_t n = b.grid.views_size();
        std::vector<double> views(n);
        net.forward(b.features.data(), n, views.data());
        std::vector<double> pred;
        drf::lf_predict(b.grid, views, b.psf, pred);
        b.gt_tiles = pred;
        for (double& v : b.gt_tiles) v += 0.25;
    }

    const drf::LossConfig lc;
    std::vector<double> grad;
    drf::capture_loss_grad(net, b, lc, grad);

    double max_rel = 0.0;
    const double h = 1e-6;
    for (int k = 0; k < 100; ++k) {
        const std::size_t i = rng.below(net.theta.size());
        const double save = net.theta[i];
        net.theta[i] = save + h;
        const double lp = drf::capture_loss(net, b, lc);
        net.theta[i] = save - h;
        const double lm = drf::capture_loss(net, b, lc);
        net.theta[i] = save;
        const double fd = (lp - lm) / (2.0 * h);
        const double rel = std::fabs(grad[i] - fd) /
                           std::max({std::fabs(grad[i]), std::fabs(fd), 1e-6});
        max_rel = std::max(max_rel, rel);
    }
    const double secs = watch.seconds();
    report(max_rel <= 1e-3 && secs < 30.0, "2 gradient-oracle",
           fmt("100 parameters, max_rel_err=%.2e (<=1e-3), %.1fs (<30s)", max_rel, secs));
}

void criterion_3_loss_exactness() {
    const double in_range[3] = {0.0, 0.5, 1.0};
    const double mixed[3] = {-0.25, 0.5, 1.25};
    const double gt_a[4] = {0.0, 0.0, 0.0, 0.0};
    const double pr_a[4] = {1.0, 1.0, 1.0, 1.0};
    const double gt_b[2] = {0.5, 0.25};
    const double pr_b[2] = {2.0, 0.25};
    const double match_out[1] = {1.25};

    const drf::LossConfig lc; // lambda0 = 1, lambda1 = 1e-7
    const bool pass = drf::range_penalty(in_range, 3) == 0.0 &&
                      drf::range_penalty(mixed, 3) == 0.5 &&
                      drf::total_loss(gt_a, gt_a, 4, lc) == 0.0 &&
                      drf::total_loss(gt_a, pr_a, 4, lc) == 4.0 &&
                      drf::total_loss(gt_b, pr_b, 2, lc) == 1.5 + 1e-7 * 1.0 &&
                      drf::total_loss(match_out, match_out, 1, lc) == 1e-7 * 0.25;
    report(pass, "3 loss-exactness",
           "range_penalty and total_loss reproduce the analytic examples exactly");
}

void criterion_4_geometry() {
    const drf::ApertureGeometry g = drf::default_geometry();
    const auto cov = drf::total_coverage(g);
    const bool cov_ok =
        std::fabs(cov.first - 46.6) <= 0.5 && std::fabs(cov.second - 37.6) <= 0.5;

    const double deg = 180.0 / std::numbers::pi;
    double max_diff = 0.0;
    for (std::size_t a = 0; a < g.aperture_centers.size(); ++a)
        for (const double px : {0.0, -0.5 * g.panel_width, 0.5 * g.panel_width})
            for (const double py : {0.0, 0.4 * g.panel_height}) {
                const drf::AngleRange r = drf::incident_angle_range_at(g, a, px, py);
                const double cx = g.aperture_centers[a][0], cy = g.aperture_centers[a][1];
                const double m = g.standoff;
                max_diff = std::max(
                    {max_diff,
                     std::fabs(r.u_lo - deg * std::atan((cx - px - 0.5 * g.aperture_width) / m)),
                     std::fabs(r.u_hi - deg * std::atan((cx - px + 0.5 * g.aperture_width) / m)),
                     std::fabs(r.v_lo - deg * std::atan((cy - py - 0.5 * g.aperture_height) / m)),
                     std::fabs(r.v_hi - deg * std::atan((cy - py + 0.5 * g.aperture_height) / m))});
            }
    report(cov_ok && max_diff <= 1e-9, "4 geometry",
           fmt("coverage %.2fx%.2f deg (46.6x37.6 +-0.5), angle-range analytic diff %.1e "
               "(<=1e-9)",
               cov.first, cov.second, max_diff));
}

void criterion_5_encoder() {
    const drf::EncoderConfig enc;
    const std::size_t width = drf::encoded_width(enc);
    bool pairs_ok = width == 64;
    if (pairs_ok) {
        const double zeros[6] = {0, 0, 0, 0, 0, 0};
        std::vector<double> out(width);
        drf::positional_encode(enc, zeros, out.data());
        for (std::size_t k = 0; k < width; k += 2)
            pairs_ok = pairs_ok && out[k] == 0.0 && out[k + 1] == 1.0;
    }
    report(pairs_ok, "5 encoder",
           fmt("width=%zu (64 for levels 1/5/10), gamma(0) gives exact (0,1) pairs",
               width));
}

double mean_psnr_of(const json& report_json, const std::string& model) {
    return report_json.at("models").at(model).at("mean").at("psnr").get<double>();
}

bool g_pipeline_ok = false;

void criterion_6_end_to_end() {
    Stopwatch watch;
    if (!std::getenv("DRF_BIN")) {
        report(false, "6 end-to-end", "DRF_BIN not set");
        return;
    }
    const std::string cfg = "--config \"" + config_path() + "\"";
    if (run_drf("simulate " + cfg + " --out \"" + ws_path("dataset") + "\"", "log_sim.txt") !=
        0) {
        report(false, "6 end-to-end", "simulate failed, see " + ws_path("log_sim.txt"));
        return;
    }
    if (run_drf("train " + cfg + " --dataset \"" + ws_path("dataset") + "\" --out \"" +
                    ws_path("models") + "\"",
                "log_train.txt") != 0) {
        report(false, "6 end-to-end", "train failed, see " + ws_path("log_train.txt"));
        return;
    }
    if (run_drf("eval " + cfg + " --dataset \"" + ws_path("dataset") + "\" --models \"" +
                    ws_path("models") + "\" --out \"" + ws_path("eval") + "\"",
                "log_eval.txt") != 0) {
        report(false, "6 end-to-end", "eval failed, see " + ws_path("log_eval.txt"));
        return;
    }
    const json rep = json::parse(read_file(ws_path("eval") + "/report.json"));
    const double ours = mean_psnr_of(rep, "ours_G");
    const double vanilla = mean_psnr_of(rep, "vanilla_G");
    const double secs = watch.seconds();
    g_pipeline_ok = true;
    report(ours >= vanilla + 3.0 && secs <= 900.0, "6 end-to-end",
           fmt("held-out mean psnr ours=%.2f dB vs vanilla=%.2f dB, gap=%.2f (>=3.0), "
               "%.0fs (<=900s)",
               ours, vanilla, ours - vanilla, secs));
}

/// Non-increasing after deleting at most one bin (1e-9 slack).
bool monotone_within_one_bin(const std::vector<double>& v) {
    for (std::size_t skip = 0; skip <= v.size(); ++skip) {
        bool ok = true;
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i + 1 == skip) continue; // skip==0: delete nothing
            if (v[i] > prev + 1e-9) ok = false;
            prev = v[i];
        }
        if (ok) return true;
    }
    return false;
}

void criterion_7_angular_fidelity() {
    if (!g_pipeline_ok) {
        report(false, "7 angular-fidelity", "skipped: end-to-end artifacts missing");
        return;
    }
    const std::string cfg = "--config \"" + config_path() + "\"";
    const int a = run_drf("profile " + cfg + " --checkpoint \"" + ws_path("models") +
                              "/ours_G\" --out \"" + ws_path("profile_model.csv") + "\"",
                          "log_prof_model.txt");
    const int b = run_drf("profile --dataset \"" + ws_path("dataset") + "\" --out \"" +
                              ws_path("profile_gt.csv") + "\"",
                          "log_prof_gt.txt");
    if (a != 0 || b != 0) {
        report(false, "7 angular-fidelity", "profile command failed");
        return;
    }
    const auto model = read_profile_csv(ws_path("profile_model.csv"));
    const auto gt = read_profile_csv(ws_path("profile_gt.csv"));
    std::vector<double> mv, gv;
    for (const auto& [label, value] : gt) {
        const auto it = model.find(label);
        if (it != model.end()) {
            gv.push_back(value);
            mv.push_back(it->second);
        }
    }
    if (mv.size() < 3) {
        report(false, "7 angular-fidelity", "too few shared profile bins");
        return;
    }
    double rho = 0.0;
    bool rho_ok = false;
    try {
        rho = drf::spearman(mv, gv);
        rho_ok = rho >= 0.9;
    } catch (const std::exception&) {
        rho_ok = false; // constant profile: no credible correlation
    }
    // order by radial label r0, r1, ...
    std::vector<std::pair<int, double>> ordered;
    for (const auto& [label, value] : model)
        ordered.emplace_back(std::stoi(label.substr(1)), value);
    std::sort(ordered.begin(), ordered.end());
    std::vector<double> radial;
    for (const auto& [_, value] : ordered) radial.push_back(value);
    const bool mono = monotone_within_one_bin(radial);
    report(rho_ok && mono, "7 angular-fidelity",
           fmt("spearman=%.3f (>=0.9), monotone-within-one-bin=%s over %zu bins", rho,
               mono ? "yes" : "no", radial.size()));
}

void criterion_8_determinism() {
    if (!g_pipeline_ok) {
        report(false, "8 determinism", "skipped: end-to-end artifacts missing");
        return;
    }
    const std::string cfg = "--config \"" + config_path() + "\"";
    if (run_drf("simulate " + cfg + " --out \"" + ws_path("dataset2") + "\"",
                "log_sim2.txt") != 0 ||
        run_drf("train " + cfg + " --dataset \"" + ws_path("dataset2") + "\" --out \"" +
                    ws_path("models2") + "\"",
                "log_train2.txt") != 0 ||
        run_drf("eval " + cfg + " --dataset \"" + ws_path("dataset2") + "\" --models \"" +
                    ws_path("models2") + "\" --out \"" + ws_path("eval2") + "\"",
                "log_eval2.txt") != 0) {
        report(false, "8 determinism", "second pipeline run failed");
        return;
    }
    std::vector<std::string> mismatched;
    const auto compare = [&](const std::string& a, const std::string& bpath,
                             const std::string& label) {
        if (read_file(a) != read_file(bpath)) mismatched.push_back(label);
    };
    compare(ws_path("dataset") + "/capture_p0_a0_G.bin", ws_path("dataset2") +
                "/capture_p0_a0_G.bin", "capture bytes");
    compare(ws_path("dataset") + "/psf_p4_a2.bin", ws_path("dataset2") + "/psf_p4_a2.bin",
            "psf bytes");
    for (const char* leaf :
         {"ours_G.meta.json", "ours_G.theta.bin", "ours_G.theta.json", "vanilla_G.theta.bin",
          "ours_G_loss.csv", "vanilla_G_loss.csv"})
        compare(ws_path("models") + "/" + leaf, ws_path("models2") + "/" + leaf, leaf);
    for (const char* leaf : {"report.json", "report.csv"})
        compare(ws_path("eval") + "/" + leaf, ws_path("eval2") + "/" + leaf, leaf);

    json ma = json::parse(read_file(ws_path("dataset") + "/manifest.json"));
    json mb = json::parse(read_file(ws_path("dataset2") + "/manifest.json"));
    ma.erase("meta");
    mb.erase("meta");
    if (ma != mb) mismatched.push_back("manifest (outside meta)");

    std::string detail = "checkpoints, reports and CSVs byte-identical across reruns";
    if (!mismatched.empty()) {
        detail = "mismatch in:";
        for (const auto& m : mismatched) detail += " " + m;
    }
    report(mismatched.empty(), "8 determinism", detail);
}

void criterion_9_inverse_solvers() {
    // frozen after the oracle run documented in the repo
    const std::size_t iters = 500;
    const double lr = 5e-3;

    drf::RngStream rng(1009, 0);
    Tensor scene({16, 16});
    for (std::size_t i = 0; i < scene.size(); ++i)
        scene[i] = static_cast<float>(rng.uniform(0.0, 1.0));
    Tensor psf({16, 16});
    for (std::size_t i = 0; i < psf.size(); ++i)
        psf[i] = static_cast<float>(rng.uniform(0.0, 0.05));
    psf.at(7, 7) += 1.0f;
    double sum = 0.0;
    for (std::size_t i = 0; i < psf.size(); ++i) sum += psf[i];
    for (std::size_t i = 0; i < psf.size(); ++i) psf[i] = static_cast<float>(psf[i] / sum);

    const drf::ForwardModel model(psf, 16, 16);
    const Tensor y = drf::forward_measure(model, scene);
    const Tensor rec = drf::solve_scene(model, y, iters, lr);
    const double psnr_scene = drf::psnr(scene, rec);

    const drf::AngularDomain dom(-12.0, 12.0, -9.0, 9.0, 3, 3);
    Tensor patches({3, 3, 8, 8});
    for (std::size_t w = 0; w < 9; ++w) {
        float* p = patches.data() + w * 64;
        double wsum = 0.0;
        for (std::size_t i = 0; i < 64; ++i) p[i] = static_cast<float>(rng.uniform(0.0, 0.05));
        p[3 * 8 + 3] += 1.0f;
        for (std::size_t i = 0; i < 64; ++i) wsum += p[i];
        for (std::size_t i = 0; i < 64; ++i) p[i] = static_cast<float>(p[i] / wsum);
    }
    const drf::PsfStack psfs(patches, dom);
    const drf::DisplayEmissionModel em;
    const drf::LightField gt = drf::ground_truth_lightfield(dom, em, 0.5, 0.5, 8, 8);
    drf::Capture cap;
    cap.image = drf::assemble_subapertures(drf::forward_measure_lf(psfs, gt.views));
    cap.display_x = 0.5;
    cap.display_y = 0.5;
    const drf::LightField lf = drf::solve_lightfield(psfs, cap, iters, lr);

    double mse = 0.0;
    for (std::size_t i = 0; i < gt.views.size(); ++i) {
        const double d = static_cast<double>(gt.views[i]) - lf.views[i];
        mse += d * d;
    }
    mse /= static_cast<double>(gt.views.size());
    const double psnr_lf = mse > 0.0 ? 10.0 * std::log10(1.0 / mse) : drf::kPsnrCap;

    report(psnr_scene >= 30.0 && psnr_lf >= 30.0, "9 inverse-solvers",
           fmt("500 iterations at lr=5e-3: scene %.1f dB, light field %.1f dB (>=30)",
               psnr_scene, psnr_lf));
}

} // namespace

int main() {
    criterion_1_convolution();
    criterion_2_gradient();
    criterion_3_loss_exactness();
    criterion_4_geometry();
    criterion_5_encoder();
    criterion_6_end_to_end();
    criterion_7_angular_fidelity();
    criterion_8_determinism();
    criterion_9_inverse_solvers();
    std::printf("%d/9 criteria passed\n", 9 - g_failures);
    return g_failures;
}
