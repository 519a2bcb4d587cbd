#include "drf/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>

#include <nlohmann/json.hpp>

#include "drf/errors.hpp"
#include "drf/parallel.hpp"
#include "drf/tensor_io.hpp"

namespace drf {

using json = nlohmann::json;

namespace {

// Adam descent on a single scene patch x (sh x sw) measured through a full
// convolution with kernel (kh x kw) and a centered crop to (oh x ow).
// Returns the lowest-loss iterate; `iters` steps, iters + 1 evaluations.
std::vector<double> solve_window(const double* gt, std::size_t oh, std::size_t ow,
                                 const double* kernel, std::size_t kh, std::size_t kw,
                                 std::size_t sh, std::size_t sw, std::size_t iters,
                                 double lr, const char* who) {
    const std::size_t fh = sh + kh - 1, fw = sw + kw - 1;
    if (oh > fh || ow > fw)
        throw ConfigError(std::string(who) + ": measurement exceeds convolution support");
    const std::size_t oi = (fh - oh) / 2, oj = (fw - ow) / 2;

    std::vector<double> x(sh * sw, 0.0), best = x;
    double best_loss = std::numeric_limits<double>::infinity();
    AdamConfig acfg;
    acfg.base_lr = lr;
    acfg.total_epochs = 0; // constant learning rate
    acfg.clip_norm = 0.0;  // image-domain descent, no clipping
    AdamState<double> st(x.size());
    const LossConfig lc;

    std::vector<double> pred(oh * ow), dpred(oh * ow), dfull(fh * fw);
    for (std::size_t it = 0;; ++it) {
        const std::vector<double> full = conv_full_2d(x.data(), sh, sw, kernel, kh, kw);
        for (std::size_t r = 0; r < oh; ++r)
            for (std::size_t c = 0; c < ow; ++c)
                pred[r * ow + c] = full[(r + oi) * fw + (c + oj)];
        const double loss = total_loss_grad(gt, pred.data(), oh * ow, lc, dpred.data());
        if (!std::isfinite(loss))
            throw NumericError(std::string(who) + ": diverged: non-finite loss at iteration " +
                               std::to_string(it));
        if (loss < best_loss) {
            best_loss = loss;
            best = x;
        }
        if (it == iters) break;
        std::fill(dfull.begin(), dfull.end(), 0.0);
        for (std::size_t r = 0; r < oh; ++r)
            for (std::size_t c = 0; c < ow; ++c)
                dfull[(r + oi) * fw + (c + oj)] = dpred[r * ow + c];
        const std::vector<double> dx =
            conv_full_2d_adjoint(dfull.data(), fh, fw, kernel, kh, kw);
        adam_step(st, acfg, x, dx, 0);
    }
    return best;
}

std::vector<double> widen(const float* p, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(p[i]);
    return out;
}

void require_iters_lr(std::size_t iters, double lr, const char* who) {
    if (iters == 0) throw ConfigError(std::string(who) + ": at least one iteration required");
    if (!(lr > 0.0) || !std::isfinite(lr))
        throw ConfigError(std::string(who) + ": positive learning rate required");
}

std::size_t channel_index(Channel c) { return static_cast<std::size_t>(c); }

std::string activation_name(Activation a) {
    return a == Activation::Sine ? "sine" : "relu";
}

Activation activation_from_name(const std::string& s) {
    if (s == "sine") return Activation::Sine;
    if (s == "relu") return Activation::Relu;
    throw IoError("checkpoint: unknown activation '" + s + "'");
}

Mlp<float> checkpoint_net(const Checkpoint& ck) {
    Mlp<float> net(MlpConfig{encoded_width(ck.model.encoder), ck.model.hidden,
                             ck.model.activation, ck.model.omega0});
    if (net.param_count() != ck.theta.size())
        throw ConfigError("checkpoint: parameter count mismatch (" +
                          std::to_string(ck.theta.size()) + " stored, " +
                          std::to_string(net.param_count()) + " expected)");
    net.theta = ck.theta;
    return net;
}

// Per-sample data that stays fixed across epochs.
struct PreparedSample {
    std::vector<float> base_coords;
    std::vector<float> gt_tiles;
    std::vector<float> psf;
};

LfGrid sample_grid(const InrSample& s, const char* who) {
    const AngularDomain& dom = s.psfs.domain;
    const Tensor& img = s.capture.image;
    if (img.rank() != 2) throw ConfigError(std::string(who) + ": capture must be rank 2");
    if (img.dim(0) % dom.n_u != 0 || img.dim(1) % dom.n_v != 0)
        throw ConfigError(std::string(who) + ": capture " + std::to_string(img.dim(0)) +
                          "x" + std::to_string(img.dim(1)) +
                          " does not conform to the " + std::to_string(dom.n_u) + "x" +
                          std::to_string(dom.n_v) + " tiling");
    return LfGrid{dom.n_u, dom.n_v, img.dim(0) / dom.n_u, img.dim(1) / dom.n_v,
                  s.psfs.patch_h(), s.psfs.patch_w()};
}

void append_model_rows(std::vector<CsvRow>& rows, const std::string& name,
                       const EvalReport& rep) {
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const EvalRow& r = rep.rows[i];
        rows.push_back({name + "_" + std::to_string(i),
                        {r.psnr_db, r.ssim_val, r.msssim_val}});
    }
    rows.push_back({name + "_mean", {rep.mean_psnr, rep.mean_ssim, rep.mean_msssim}});
}

} // namespace

Tensor solve_scene(const ForwardModel& model, const Tensor& y_gt, std::size_t iters,
                   double lr) {
    require_iters_lr(iters, lr, "solve_scene");
    if (y_gt.rank() != 2 || y_gt.dim(0) != model.out_h || y_gt.dim(1) != model.out_w)
        throw ConfigError("solve_scene: measurement shape mismatch");
    const std::size_t sh = model.psf.dim(0), sw = model.psf.dim(1);
    const std::vector<double> kernel = widen(model.psf.data(), model.psf.size());
    const std::vector<double> gt = widen(y_gt.data(), y_gt.size());
    const std::vector<double> best = solve_window(gt.data(), model.out_h, model.out_w,
                                                  kernel.data(), sh, sw, sh, sw, iters,
                                                  lr, "solve_scene");
    Tensor out({sh, sw});
    for (std::size_t i = 0; i < best.size(); ++i) out[i] = static_cast<float>(best[i]);
    return out;
}

LightField solve_lightfield(const PsfStack& psfs, const Capture& capture,
                            std::size_t iters, double lr) {
    require_iters_lr(iters, lr, "solve_lightfield");
    const LfGrid g = sample_grid(InrSample{capture, psfs}, "solve_lightfield");
    const Tensor tiles = extract_subapertures(capture.image, g.n_u, g.n_v, g.th, g.tw);

    Tensor views({g.n_u, g.n_v, g.th, g.tw});
    std::exception_ptr eptr;
    std::mutex mtx;
    parallel_for(g.windows(), [&](std::size_t w) {
        try {
            const std::vector<double> kernel = widen(psfs.patches.data() + w * g.ph * g.pw,
                                                     g.ph * g.pw);
            const std::vector<double> gt = widen(tiles.data() + w * g.th * g.tw,
                                                 g.th * g.tw);
            const std::vector<double> best =
                solve_window(gt.data(), g.th, g.tw, kernel.data(), g.ph, g.pw, g.th,
                             g.tw, iters, lr, "solve_lightfield");
            float* dst = views.data() + w * g.th * g.tw;
            for (std::size_t i = 0; i < best.size(); ++i)
                dst[i] = static_cast<float>(best[i]);
        } catch (...) {
            const std::lock_guard<std::mutex> lock(mtx);
            if (!eptr) eptr = std::current_exception();
        }
    });
    if (eptr) std::rethrow_exception(eptr);
    return LightField(capture.display_x, capture.display_y, psfs.domain,
                      std::move(views));
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    checkpoint_net(ck); // validates theta against the architecture
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);

    json meta;
    meta["activation"] = activation_name(ck.model.activation);
    meta["channel"] = channel_name(ck.channel);
    meta["coverage_deg"] = {ck.coverage_deg[0], ck.coverage_deg[1]};
    meta["encoder"] = {{"encode", ck.model.encoder.encode},
                       {"levels",
                        {ck.model.encoder.levels_display, ck.model.encoder.levels_angular,
                         ck.model.encoder.levels_spatial}}};
    meta["hidden"] = ck.model.hidden;
    meta["omega0"] = ck.model.omega0;
    meta["tile"] = {ck.tile_h, ck.tile_w};
    std::ofstream out(path + ".meta.json", std::ios::binary);
    if (!out) throw IoError("checkpoint: cannot write " + path + ".meta.json");
    out << meta.dump(2) << '\n';
    if (!out) throw IoError("checkpoint: write failed for " + path + ".meta.json");

    save_tensor(Tensor::from_data({ck.theta.size()}, ck.theta), path + ".theta");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path + ".meta.json", std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open " + path + ".meta.json");
    json meta;
    try {
        in >> meta;
        Checkpoint ck;
        ck.model.activation = activation_from_name(meta.at("activation").get<std::string>());
        ck.channel = channel_from_name(meta.at("channel").get<std::string>());
        ck.coverage_deg[0] = meta.at("coverage_deg").at(0).get<double>();
        ck.coverage_deg[1] = meta.at("coverage_deg").at(1).get<double>();
        ck.model.encoder.encode = meta.at("encoder").at("encode").get<bool>();
        ck.model.encoder.levels_display = meta.at("encoder").at("levels").at(0).get<std::size_t>();
        ck.model.encoder.levels_angular = meta.at("encoder").at("levels").at(1).get<std::size_t>();
        ck.model.encoder.levels_spatial = meta.at("encoder").at("levels").at(2).get<std::size_t>();
        ck.model.hidden = meta.at("hidden").get<std::vector<std::size_t>>();
        ck.model.omega0 = meta.at("omega0").get<double>();
        ck.tile_h = meta.at("tile").at(0).get<std::size_t>();
        ck.tile_w = meta.at("tile").at(1).get<std::size_t>();

        const Tensor theta = load_tensor(path + ".theta");
        ck.theta = theta.values();
        checkpoint_net(ck); // parameter-count consistency
        return ck;
    } catch (const json::exception& e) {
        throw IoError("checkpoint: malformed " + path + ".meta.json (" + e.what() + ")");
    }
}

TrainResult train_inr(const TrainRun& run, const ApertureGeometry& geometry,
                      const TrainConfig& cfg) {
    if (run.samples.empty()) throw ConfigError("train_inr: at least one capture required");
    if (run.epochs == 0) throw ConfigError("train_inr: at least one epoch required");
    const auto [cov_u, cov_v] = total_coverage(geometry);

    const LfGrid grid = sample_grid(run.samples.front(), "train_inr");
    std::vector<PreparedSample> prepared(run.samples.size());
    for (std::size_t i = 0; i < run.samples.size(); ++i) {
        const InrSample& s = run.samples[i];
        if (s.capture.channel != run.channel)
            throw ConfigError("train_inr: capture " + std::to_string(i) + " is channel " +
                              channel_name(s.capture.channel) + ", run wants " +
                              channel_name(run.channel));
        const LfGrid g = sample_grid(s, "train_inr");
        if (g.n_u != grid.n_u || g.n_v != grid.n_v || g.th != grid.th ||
            g.tw != grid.tw || g.ph != grid.ph || g.pw != grid.pw)
            throw ConfigError("train_inr: capture " + std::to_string(i) +
                              " does not share the run tiling");
        prepared[i].base_coords =
            inr_coords<float>(s.psfs.domain, g.th, g.tw, s.capture.display_x,
                              s.capture.display_y, cov_u / 2.0, cov_v / 2.0);
        prepared[i].gt_tiles =
            extract_subapertures(s.capture.image, g.n_u, g.n_v, g.th, g.tw).values();
        prepared[i].psf = s.psfs.patches.values();
    }

    Mlp<float> net(MlpConfig{encoded_width(cfg.model.encoder), cfg.model.hidden,
                             cfg.model.activation, cfg.model.omega0});
    const std::uint64_t base_stream = 256 + 16 * channel_index(run.channel);
    net.init(RngStream(run.seed, base_stream));
    RngStream shuffle_rng(run.seed, base_stream + 1);
    RngStream noise_rng(run.seed, base_stream + 2);

    AdamConfig acfg = cfg.adam;
    acfg.total_epochs = run.epochs;
    AdamState<float> state(net.param_count());

    std::vector<std::size_t> order(run.samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> epoch_loss;
    epoch_loss.reserve(run.epochs);
    std::vector<float> grad;

    for (std::size_t e = 0; e < run.epochs; ++e) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        double sum = 0.0;
        for (const std::size_t idx : order) {
            std::vector<float> coords = prepared[idx].base_coords;
            add_row_noise(cfg.noise, coords, noise_rng);
            CaptureBatch<float> batch{grid, encode_rows(cfg.model.encoder, coords),
                                      prepared[idx].gt_tiles, prepared[idx].psf};
            try {
                const double loss = capture_loss_grad(net, batch, cfg.loss, grad);
                if (!std::isfinite(loss)) throw NumericError("non-finite loss");
                adam_step(state, acfg, net.theta, grad, e);
                sum += loss;
            } catch (const NumericError& err) {
                throw NumericError("train_inr: diverged (epoch " + std::to_string(e) +
                                   ", capture " + std::to_string(idx) + "): " +
                                   err.what());
            }
        }
        epoch_loss.push_back(sum / static_cast<double>(run.samples.size()));
    }

    Checkpoint ck;
    ck.model = cfg.model;
    ck.theta = net.theta;
    ck.coverage_deg = {cov_u, cov_v};
    ck.tile_h = grid.th;
    ck.tile_w = grid.tw;
    ck.channel = run.channel;
    if (!run.checkpoint_path.empty()) save_checkpoint(ck, run.checkpoint_path);
    if (!run.loss_csv_path.empty()) {
        std::vector<CsvRow> rows;
        rows.reserve(epoch_loss.size());
        for (std::size_t e = 0; e < epoch_loss.size(); ++e)
            rows.push_back({"e" + std::to_string(e), {epoch_loss[e]}});
        export_csv(run.loss_csv_path, {"label", "value"}, rows);
    }
    return {std::move(ck), std::move(epoch_loss)};
}

Tensor predict_capture(const Checkpoint& ck, const InrSample& sample) {
    const LfGrid g = sample_grid(sample, "predict_capture");
    if (g.th != ck.tile_h || g.tw != ck.tile_w)
        throw ConfigError("predict_capture: capture tile " + std::to_string(g.th) + "x" +
                          std::to_string(g.tw) + " does not match the checkpoint tile " +
                          std::to_string(ck.tile_h) + "x" + std::to_string(ck.tile_w));
    const Mlp<float> net = checkpoint_net(ck);
    const std::vector<float> coords =
        inr_coords<float>(sample.psfs.domain, g.th, g.tw, sample.capture.display_x,
                          sample.capture.display_y, ck.coverage_deg[0] / 2.0,
                          ck.coverage_deg[1] / 2.0);
    const std::vector<float> features = encode_rows(ck.model.encoder, coords);
    std::vector<float> views(g.views_size());
    net.forward(features.data(), views.size(), views.data());
    std::vector<float> pred;
    lf_predict(g, views, sample.psfs.patches.values(), pred);
    return assemble_subapertures(
        Tensor::from_data({g.n_u, g.n_v, g.th, g.tw}, std::move(pred)));
}

EvalReport evaluate_model(const Checkpoint& ck, const std::vector<InrSample>& held_out) {
    if (held_out.empty()) throw ConfigError("evaluate_model: no captures to evaluate");
    EvalReport rep;
    rep.msssim_scales = std::min<std::size_t>(5, max_msssim_scales(held_out.front().capture.image));
    if (rep.msssim_scales == 0)
        throw ConfigError("evaluate_model: captures smaller than the 11x11 ssim window");
    for (const InrSample& s : held_out) {
        const Tensor pred = predict_capture(ck, s);
        EvalRow row;
        row.display_x = s.capture.display_x;
        row.display_y = s.capture.display_y;
        row.aperture_index = s.capture.aperture_index;
        row.psnr_db = psnr(s.capture.image, pred);
        row.ssim_val = ssim(s.capture.image, pred);
        row.msssim_val = msssim(s.capture.image, pred, rep.msssim_scales);
        rep.mean_psnr += row.psnr_db;
        rep.mean_ssim += row.ssim_val;
        rep.mean_msssim += row.msssim_val;
        rep.rows.push_back(row);
    }
    const double n = static_cast<double>(rep.rows.size());
    rep.mean_psnr /= n;
    rep.mean_ssim /= n;
    rep.mean_msssim /= n;
    return rep;
}

void write_eval_report_json(const std::string& path,
                            const std::vector<std::pair<std::string, EvalReport>>& models) {
    json root;
    for (const auto& [name, rep] : models) {
        json m;
        m["mean"] = {{"psnr", rep.mean_psnr}, {"ssim", rep.mean_ssim},
                     {"msssim", rep.mean_msssim}};
        m["msssim_scales"] = rep.msssim_scales;
        m["rows"] = json::array();
        for (const EvalRow& r : rep.rows)
            m["rows"].push_back({{"display_x", r.display_x},
                                 {"display_y", r.display_y},
                                 {"aperture", r.aperture_index},
                                 {"psnr", r.psnr_db},
                                 {"ssim", r.ssim_val},
                                 {"msssim", r.msssim_val}});
        root["models"][name] = std::move(m);
    }
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("report: cannot write " + path);
    out << root.dump(2) << '\n';
    if (!out) throw IoError("report: write failed for " + path);
}

void write_eval_report_csv(const std::string& path,
                           const std::vector<std::pair<std::string, EvalReport>>& models) {
    std::vector<CsvRow> rows;
    for (const auto& [name, rep] : models) append_model_rows(rows, name, rep);
    export_csv(path, {"label", "psnr", "ssim", "msssim"}, rows);
}

RadianceFn checkpoint_radiance(const Checkpoint& ck) {
    const auto net = std::make_shared<Mlp<float>>(checkpoint_net(ck));
    const EncoderConfig enc = ck.model.encoder;
    const double chu = ck.coverage_deg[0] / 2.0, chv = ck.coverage_deg[1] / 2.0;
    return [net, enc, chu, chv](double x, double y, double u, double v, double s,
                                double t) {
        const float coords[kCoordCount] = {
            static_cast<float>(2.0 * x - 1.0), static_cast<float>(2.0 * y - 1.0),
            static_cast<float>(u / chu),       static_cast<float>(v / chv),
            static_cast<float>(s),             static_cast<float>(t)};
        std::vector<float> features(encoded_width(enc));
        positional_encode(enc, coords, features.data());
        float out = 0.0f;
        net->forward(features.data(), 1, &out);
        return static_cast<double>(out);
    };
}

AngularIntensityFn checkpoint_intensity(const Checkpoint& ck, double display_x,
                                        double display_y) {
    const auto net = std::make_shared<Mlp<float>>(checkpoint_net(ck));
    const EncoderConfig enc = ck.model.encoder;
    const double chu = ck.coverage_deg[0] / 2.0, chv = ck.coverage_deg[1] / 2.0;
    const std::size_t th = ck.tile_h, tw = ck.tile_w;
    return [net, enc, chu, chv, th, tw, display_x, display_y](double u, double v) {
        const std::size_t n = th * tw;
        const std::size_t w = encoded_width(enc);
        std::vector<float> features(n * w);
        std::size_t r = 0;
        for (std::size_t s = 0; s < th; ++s)
            for (std::size_t t = 0; t < tw; ++t, ++r) {
                const float coords[kCoordCount] = {
                    static_cast<float>(2.0 * display_x - 1.0),
                    static_cast<float>(2.0 * display_y - 1.0),
                    static_cast<float>(u / chu),
                    static_cast<float>(v / chv),
                    static_cast<float>(2.0 * (static_cast<double>(s) + 0.5) /
                                           static_cast<double>(th) - 1.0),
                    static_cast<float>(2.0 * (static_cast<double>(t) + 0.5) /
                                           static_cast<double>(tw) - 1.0)};
                positional_encode(enc, coords, features.data() + r * w);
            }
        std::vector<float> out(n);
        net->forward(features.data(), n, out.data());
        double acc = 0.0;
        for (float o : out) acc += o;
        return acc / static_cast<double>(n);
    };
}

} // namespace drf
