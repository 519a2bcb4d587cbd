#include "drf/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <nlohmann/json.hpp>

#include "drf/errors.hpp"
#include "drf/mlp.hpp"

namespace drf {
namespace {

using nlohmann::json;

std::string join_key(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

[[noreturn]] void bad_type(const std::string& path, const char* expected) {
    throw ConfigError("config: '" + path + "' must be " + expected);
}

void require_known(const json& j, const std::string& prefix,
                   std::initializer_list<const char*> keys) {
    if (!j.is_object())
        throw ConfigError("config: '" + (prefix.empty() ? std::string("<root>") : prefix) +
                          "' must be an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : keys) known |= item.key() == k;
        if (!known)
            throw ConfigError("config: unknown key '" + join_key(prefix, item.key()) + "'");
    }
}

const json* find(const json& j, const char* key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

void read_number(const json& j, const char* key, const std::string& prefix, double& out) {
    if (const json* v = find(j, key)) {
        if (!v->is_number()) bad_type(join_key(prefix, key), "a number");
        out = v->get<double>();
    }
}

void read_count(const json& j, const char* key, const std::string& prefix, std::size_t& out) {
    if (const json* v = find(j, key)) {
        if (!v->is_number_unsigned()) bad_type(join_key(prefix, key), "a non-negative integer");
        out = v->get<std::size_t>();
    }
}

void read_bool(const json& j, const char* key, const std::string& prefix, bool& out) {
    if (const json* v = find(j, key)) {
        if (!v->is_boolean()) bad_type(join_key(prefix, key), "a boolean");
        out = v->get<bool>();
    }
}

void parse_geometry(const json& j, ApertureGeometry& g) {
    require_known(j, "geometry",
                  {"aperture_width", "aperture_height", "standoff", "sensor_gap", "panel_width",
                   "panel_height", "sensor_px_per_mm", "aperture_centers"});
    read_number(j, "aperture_width", "geometry", g.aperture_width);
    read_number(j, "aperture_height", "geometry", g.aperture_height);
    read_number(j, "standoff", "geometry", g.standoff);
    read_number(j, "sensor_gap", "geometry", g.sensor_gap);
    read_number(j, "panel_width", "geometry", g.panel_width);
    read_number(j, "panel_height", "geometry", g.panel_height);
    read_number(j, "sensor_px_per_mm", "geometry", g.sensor_px_per_mm);
    if (const json* v = find(j, "aperture_centers")) {
        if (!v->is_array() || v->empty())
            bad_type("geometry.aperture_centers", "a non-empty array of [cx, cy] pairs");
        std::vector<std::array<double, 2>> centers;
        for (std::size_t i = 0; i < v->size(); ++i) {
            const json& c = (*v)[i];
            if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
                bad_type("geometry.aperture_centers[" + std::to_string(i) + "]",
                         "a [cx, cy] number pair");
            centers.push_back({c[0].get<double>(), c[1].get<double>()});
        }
        g.aperture_centers = std::move(centers);
    }
}

void parse_emission(const json& j, DisplayEmissionModel& m) {
    require_known(j, "emission",
                  {"falloff_exponent", "anisotropy_h", "anisotropy_v", "spatial_spread_sigma",
                   "peak_intensity"});
    read_number(j, "falloff_exponent", "emission", m.falloff_exponent);
    read_number(j, "anisotropy_h", "emission", m.anisotropy_h);
    read_number(j, "anisotropy_v", "emission", m.anisotropy_v);
    read_number(j, "spatial_spread_sigma", "emission", m.spatial_spread_sigma);
    read_number(j, "peak_intensity", "emission", m.peak_intensity);
}

void parse_capture(const json& j, CaptureConfig& c) {
    require_known(j, "capture", {"noise_sigma", "channels"});
    read_number(j, "noise_sigma", "capture", c.noise_sigma);
    if (const json* v = find(j, "channels")) {
        if (!v->is_array() || v->empty()) bad_type("capture.channels", "a non-empty array");
        std::vector<Channel> channels;
        for (std::size_t i = 0; i < v->size(); ++i) {
            const std::string path = "capture.channels[" + std::to_string(i) + "]";
            if (!(*v)[i].is_string()) bad_type(path, "a string (R, G or B)");
            try {
                channels.push_back(channel_from_name((*v)[i].get<std::string>()));
            } catch (const ConfigError& e) {
                throw ConfigError("config: '" + path + "': " + e.what());
            }
        }
        c.channels = std::move(channels);
    }
}

void parse_tiling(const json& j, TilingConfig& t) {
    require_known(j, "tiling", {"n_u", "n_v", "win_h", "win_w"});
    read_count(j, "n_u", "tiling", t.n_u);
    read_count(j, "n_v", "tiling", t.n_v);
    read_count(j, "win_h", "tiling", t.win_h);
    read_count(j, "win_w", "tiling", t.win_w);
}

void parse_encoder(const json& j, EncoderConfig& e) {
    require_known(j, "encoder", {"encode", "levels_display", "levels_angular", "levels_spatial"});
    read_bool(j, "encode", "encoder", e.encode);
    read_count(j, "levels_display", "encoder", e.levels_display);
    read_count(j, "levels_angular", "encoder", e.levels_angular);
    read_count(j, "levels_spatial", "encoder", e.levels_spatial);
}

void parse_model(const json& j, ModelSpec& m) {
    require_known(j, "model", {"hidden", "activation", "omega0"});
    if (const json* v = find(j, "hidden")) {
        if (!v->is_array() || v->empty())
            bad_type("model.hidden", "a non-empty array of layer widths");
        std::vector<std::size_t> hidden;
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_number_unsigned() || (*v)[i].get<std::size_t>() == 0)
                bad_type("model.hidden[" + std::to_string(i) + "]", "a positive integer");
            hidden.push_back((*v)[i].get<std::size_t>());
        }
        m.hidden = std::move(hidden);
    }
    if (const json* v = find(j, "activation")) {
        if (!v->is_string()) bad_type("model.activation", "\"sine\" or \"relu\"");
        const std::string name = v->get<std::string>();
        if (name == "sine")
            m.activation = Activation::Sine;
        else if (name == "relu")
            m.activation = Activation::Relu;
        else
            bad_type("model.activation", "\"sine\" or \"relu\"");
    }
    read_number(j, "omega0", "model", m.omega0);
}

void parse_coord_noise(const json& j, NoiseConfig& n) {
    require_known(j, "coord_noise", {"enabled", "display_std", "angular_std", "subview_std"});
    read_bool(j, "enabled", "coord_noise", n.enabled);
    read_number(j, "display_std", "coord_noise", n.display_std);
    read_number(j, "angular_std", "coord_noise", n.angular_std);
    read_number(j, "subview_std", "coord_noise", n.subview_std);
}

void parse_optimizer(const json& j, AdamConfig& a) {
    require_known(j, "optimizer", {"lr", "epochs", "beta1", "beta2", "eps", "clip_norm"});
    read_number(j, "lr", "optimizer", a.base_lr);
    read_count(j, "epochs", "optimizer", a.total_epochs);
    read_number(j, "beta1", "optimizer", a.beta1);
    read_number(j, "beta2", "optimizer", a.beta2);
    read_number(j, "eps", "optimizer", a.eps);
    read_number(j, "clip_norm", "optimizer", a.clip_norm);
}

void parse_loss(const json& j, LossConfig& l) {
    require_known(j, "loss", {"lambda0", "lambda1"});
    read_number(j, "lambda0", "loss", l.lambda0);
    read_number(j, "lambda1", "loss", l.lambda1);
}

void parse_solver(const json& j, SolveConfig& s) {
    require_known(j, "solver", {"iters", "lr"});
    read_count(j, "iters", "solver", s.iters);
    read_number(j, "lr", "solver", s.lr);
}

void parse_profile(const json& j, ProfileConfig& p) {
    require_known(j, "profile", {"bins", "grid"});
    read_count(j, "bins", "profile", p.bins);
    read_count(j, "grid", "profile", p.grid);
}

void parse_render(const json& j, RenderConfig& r) {
    require_known(j, "render", {"width", "height", "camera"});
    read_count(j, "width", "render", r.width);
    read_count(j, "height", "render", r.height);
    if (const json* v = find(j, "camera")) {
        if (!v->is_array() || v->size() != 3 || !(*v)[0].is_number() || !(*v)[1].is_number() ||
            !(*v)[2].is_number())
            bad_type("render.camera", "an [x, y, z] number triple");
        r.camera = {(*v)[0].get<double>(), (*v)[1].get<double>(), (*v)[2].get<double>()};
    }
}

void check(bool ok, const std::string& message) {
    if (!ok) throw ConfigError("config: " + message);
}

} // namespace

void RunConfig::validate() const {
    geometry.validate();
    check(emission.falloff_exponent >= 0.0, "emission.falloff_exponent must be >= 0");
    check(emission.anisotropy_h > 0.0 && emission.anisotropy_v > 0.0,
          "emission anisotropy factors must be positive");
    check(emission.spatial_spread_sigma > 0.0, "emission.spatial_spread_sigma must be positive");
    check(emission.peak_intensity > 0.0, "emission.peak_intensity must be positive");
    check(capture.noise_sigma >= 0.0, "capture.noise_sigma must be >= 0");
    check(!capture.channels.empty(), "capture.channels must not be empty");
    for (std::size_t i = 0; i < capture.channels.size(); ++i)
        for (std::size_t k = i + 1; k < capture.channels.size(); ++k)
            check(capture.channels[i] != capture.channels[k],
                  "capture.channels lists " + channel_name(capture.channels[i]) + " twice");
    check(tiling.n_u >= 1 && tiling.n_v >= 1, "tiling grid must be at least 1x1");
    check(tiling.win_h >= 8 && tiling.win_w >= 8, "tiling windows must be at least 8x8");
    check(!model.hidden.empty(), "model.hidden must not be empty");
    check(model.omega0 > 0.0, "model.omega0 must be positive");
    check(!model.encoder.encode || encoded_width(model.encoder) > 0,
          "encoder levels must not all be zero");
    check(coord_noise.display_std >= 0.0 && coord_noise.angular_std >= 0.0 &&
              coord_noise.subview_std >= 0.0,
          "coord_noise deviations must be >= 0");
    check(optimizer.base_lr > 0.0, "optimizer.lr must be positive");
    check(optimizer.total_epochs >= 1, "optimizer.epochs must be at least 1");
    check(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0, "optimizer.beta1 must lie in [0, 1)");
    check(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0, "optimizer.beta2 must lie in [0, 1)");
    check(optimizer.eps > 0.0, "optimizer.eps must be positive");
    check(loss.lambda0 > 0.0, "loss.lambda0 must be positive");
    check(loss.lambda1 >= 0.0, "loss.lambda1 must be >= 0");
    check(solver.iters >= 1, "solver.iters must be at least 1");
    check(solver.lr > 0.0, "solver.lr must be positive");
    check(profile.bins >= 1, "profile.bins must be at least 1");
    check(profile.grid >= 2, "profile.grid must be at least 2");
    check(render.width >= 1 && render.height >= 1, "render size must be at least 1x1");
    check(render.camera[2] > 0.0, "render.camera z must be positive (in front of the panel)");
}

RunConfig config_from_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    require_known(root, "",
                  {"seed", "out_dir", "geometry", "emission", "capture", "tiling", "encoder",
                   "model", "coord_noise", "optimizer", "loss", "solver", "profile", "render"});

    RunConfig cfg;
    if (const json* v = find(root, "seed")) {
        if (!v->is_number_unsigned()) bad_type("seed", "a non-negative integer");
        cfg.seed = v->get<std::uint64_t>();
    }
    if (const json* v = find(root, "out_dir")) {
        if (!v->is_string()) bad_type("out_dir", "a string");
        cfg.out_dir = v->get<std::string>();
    }
    if (const json* v = find(root, "geometry")) parse_geometry(*v, cfg.geometry);
    if (const json* v = find(root, "emission")) parse_emission(*v, cfg.emission);
    if (const json* v = find(root, "capture")) parse_capture(*v, cfg.capture);
    if (const json* v = find(root, "tiling")) parse_tiling(*v, cfg.tiling);
    if (const json* v = find(root, "encoder")) parse_encoder(*v, cfg.model.encoder);
    if (const json* v = find(root, "model")) parse_model(*v, cfg.model);
    if (const json* v = find(root, "coord_noise")) parse_coord_noise(*v, cfg.coord_noise);
    if (const json* v = find(root, "optimizer")) parse_optimizer(*v, cfg.optimizer);
    if (const json* v = find(root, "loss")) parse_loss(*v, cfg.loss);
    if (const json* v = find(root, "solver")) parse_solver(*v, cfg.solver);
    if (const json* v = find(root, "profile")) parse_profile(*v, cfg.profile);
    if (const json* v = find(root, "render")) parse_render(*v, cfg.render);
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("config: cannot open '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return config_from_json_text(text.str());
}

std::string config_to_json_text(const RunConfig& cfg) {
    json root;
    root["seed"] = cfg.seed;
    root["out_dir"] = cfg.out_dir;

    json& g = root["geometry"];
    g["aperture_width"] = cfg.geometry.aperture_width;
    g["aperture_height"] = cfg.geometry.aperture_height;
    g["standoff"] = cfg.geometry.standoff;
    g["sensor_gap"] = cfg.geometry.sensor_gap;
    g["panel_width"] = cfg.geometry.panel_width;
    g["panel_height"] = cfg.geometry.panel_height;
    g["sensor_px_per_mm"] = cfg.geometry.sensor_px_per_mm;
    g["aperture_centers"] = json::array();
    for (const auto& c : cfg.geometry.aperture_centers)
        g["aperture_centers"].push_back({c[0], c[1]});

    json& e = root["emission"];
    e["falloff_exponent"] = cfg.emission.falloff_exponent;
    e["anisotropy_h"] = cfg.emission.anisotropy_h;
    e["anisotropy_v"] = cfg.emission.anisotropy_v;
    e["spatial_spread_sigma"] = cfg.emission.spatial_spread_sigma;
    e["peak_intensity"] = cfg.emission.peak_intensity;

    json& cap = root["capture"];
    cap["noise_sigma"] = cfg.capture.noise_sigma;
    cap["channels"] = json::array();
    for (Channel c : cfg.capture.channels) cap["channels"].push_back(channel_name(c));

    json& t = root["tiling"];
    t["n_u"] = cfg.tiling.n_u;
    t["n_v"] = cfg.tiling.n_v;
    t["win_h"] = cfg.tiling.win_h;
    t["win_w"] = cfg.tiling.win_w;

    json& enc = root["encoder"];
    enc["encode"] = cfg.model.encoder.encode;
    enc["levels_display"] = cfg.model.encoder.levels_display;
    enc["levels_angular"] = cfg.model.encoder.levels_angular;
    enc["levels_spatial"] = cfg.model.encoder.levels_spatial;

    json& m = root["model"];
    m["hidden"] = cfg.model.hidden;
    m["activation"] = cfg.model.activation == Activation::Sine ? "sine" : "relu";
    m["omega0"] = cfg.model.omega0;

    json& n = root["coord_noise"];
    n["enabled"] = cfg.coord_noise.enabled;
    n["display_std"] = cfg.coord_noise.display_std;
    n["angular_std"] = cfg.coord_noise.angular_std;
    n["subview_std"] = cfg.coord_noise.subview_std;

    json& o = root["optimizer"];
    o["lr"] = cfg.optimizer.base_lr;
    o["epochs"] = cfg.optimizer.total_epochs;
    o["beta1"] = cfg.optimizer.beta1;
    o["beta2"] = cfg.optimizer.beta2;
    o["eps"] = cfg.optimizer.eps;
    o["clip_norm"] = cfg.optimizer.clip_norm;

    json& l = root["loss"];
    l["lambda0"] = cfg.loss.lambda0;
    l["lambda1"] = cfg.loss.lambda1;

    json& s = root["solver"];
    s["iters"] = cfg.solver.iters;
    s["lr"] = cfg.solver.lr;

    json& p = root["profile"];
    p["bins"] = cfg.profile.bins;
    p["grid"] = cfg.profile.grid;

    json& r = root["render"];
    r["width"] = cfg.render.width;
    r["height"] = cfg.render.height;
    r["camera"] = {cfg.render.camera[0], cfg.render.camera[1], cfg.render.camera[2]};

    return root.dump(2) + "\n";
}

} // namespace drf
