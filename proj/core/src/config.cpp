#include "mgp/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

namespace mgp {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
  if (!j.is_object()) raise(ErrorKind::ConfigError, context + ": expected a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key()))
      raise(ErrorKind::ConfigError, "unknown key '" + it.key() + "' in " + context);
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    raise(ErrorKind::ConfigError, std::string("bad value for '") + key + "'");
  }
}

}  // namespace

// ---- channels ----

namespace {

json channel_to_json(const gp::GpChannelSpec& spec) {
  json j;
  if (const auto* f = std::get_if<gp::Fbm>(&spec.kind)) {
    j["kind"] = "fbm";
    j["hurst"] = f->hurst;
    j["var_v"] = spec.var_v;
  } else if (const auto* bf = std::get_if<gp::BridgeFixed>(&spec.kind)) {
    j["kind"] = "bridge_fixed";
    j["a"] = bf->a;
    j["b"] = bf->b;
  } else {
    j["kind"] = "bridge_random";
    j["endpoint_std"] = std::get<gp::BridgeRandom>(spec.kind).endpoint_std;
  }
  j["sigma"] = spec.sigma;
  return j;
}

gp::GpChannelSpec channel_from_json(const json& j) {
  gp::GpChannelSpec spec;
  const std::string kind = get_or<std::string>(j, "kind", "fbm");
  if (kind == "fbm") {
    check_keys(j, {"kind", "hurst", "sigma", "var_v"}, "model.channels[fbm]");
    spec.kind = gp::Fbm{get_or<double>(j, "hurst", 0.5)};
    spec.var_v = get_or<double>(j, "var_v", 1.0);
  } else if (kind == "bridge_fixed") {
    check_keys(j, {"kind", "a", "b", "sigma"}, "model.channels[bridge_fixed]");
    spec.kind = gp::BridgeFixed{get_or<double>(j, "a", -2.0), get_or<double>(j, "b", 2.0)};
  } else if (kind == "bridge_random") {
    check_keys(j, {"kind", "endpoint_std", "sigma"}, "model.channels[bridge_random]");
    spec.kind = gp::BridgeRandom{get_or<double>(j, "endpoint_std", 1.0)};
  } else {
    raise(ErrorKind::ConfigError, "unknown channel kind '" + kind + "'");
  }
  spec.sigma = get_or<double>(j, "sigma", 0.25);
  return spec;
}

}  // namespace

// ---- model ----

json model_config_to_json(const ModelConfig& cfg) {
  json channels = json::array();
  for (const auto& ch : cfg.channels) channels.push_back(channel_to_json(ch));
  return json{{"channels", channels},
              {"beta", cfg.beta},
              {"lr", cfg.lr},
              {"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size},
              {"n_frames", cfg.n_frames},
              {"frame_channels", cfg.frame_channels},
              {"frame_height", cfg.frame_height},
              {"frame_width", cfg.frame_width},
              {"enc_hidden", json::array({cfg.enc_hidden1, cfg.enc_hidden2})},
              {"head_hidden", cfg.head_hidden},
              {"dec_hidden", json::array({cfg.dec_hidden1, cfg.dec_hidden2})},
              {"seed", cfg.seed}};
}

ModelConfig model_config_from_json(const json& j) {
  check_keys(j,
             {"channels", "beta", "lr", "epochs", "batch_size", "n_frames", "frame_channels",
              "frame_height", "frame_width", "enc_hidden", "head_hidden", "dec_hidden", "seed"},
             "model");
  ModelConfig cfg;
  if (j.contains("channels")) {
    cfg.channels.clear();
    for (const auto& cj : j.at("channels")) cfg.channels.push_back(channel_from_json(cj));
  } else {
    cfg.channels = {gp::GpChannelSpec{gp::Fbm{0.1}, 0.25, cfg.n_frames, {}, 1.0, 0.0},
                    gp::GpChannelSpec{gp::Fbm{0.9}, 0.25, cfg.n_frames, {}, 1.0, 0.0}};
  }
  cfg.beta = get_or<double>(j, "beta", 2.0);
  cfg.lr = get_or<double>(j, "lr", 1e-3);
  cfg.epochs = get_or<int>(j, "epochs", 200);
  cfg.batch_size = get_or<int>(j, "batch_size", 32);
  cfg.n_frames = get_or<int>(j, "n_frames", 8);
  cfg.frame_channels = get_or<int>(j, "frame_channels", 1);
  cfg.frame_height = get_or<int>(j, "frame_height", 16);
  cfg.frame_width = get_or<int>(j, "frame_width", 16);
  if (j.contains("enc_hidden")) {
    auto v = j.at("enc_hidden").get<std::vector<int>>();
    if (v.size() != 2) raise(ErrorKind::ConfigError, "model.enc_hidden must have 2 entries");
    cfg.enc_hidden1 = v[0];
    cfg.enc_hidden2 = v[1];
  }
  cfg.head_hidden = get_or<int>(j, "head_hidden", 128);
  if (j.contains("dec_hidden")) {
    auto v = j.at("dec_hidden").get<std::vector<int>>();
    if (v.size() != 2) raise(ErrorKind::ConfigError, "model.dec_hidden must have 2 entries");
    cfg.dec_hidden1 = v[0];
    cfg.dec_hidden2 = v[1];
  }
  cfg.seed = get_or<std::uint64_t>(j, "seed", 1);
  for (auto& ch : cfg.channels) ch.n_frames = cfg.n_frames;
  return cfg;
}

// ---- dataset ----

json dataset_spec_to_json(const data::ToyVideoSpec& spec) {
  return json{{"family", data::to_string(spec.family)},
              {"num_sequences", spec.num_sequences},
              {"n_frames", spec.n_frames},
              {"frame_size", spec.frame_size},
              {"seed", spec.seed}};
}

data::ToyVideoSpec dataset_spec_from_json(const json& j) {
  check_keys(j, {"family", "num_sequences", "n_frames", "frame_size", "seed", "path"}, "dataset");
  data::ToyVideoSpec spec;
  spec.family = data::family_from_string(get_or<std::string>(j, "family", "bouncing_glyphs"));
  spec.num_sequences = get_or<int>(j, "num_sequences", 2000);
  spec.n_frames = get_or<int>(j, "n_frames", 8);
  spec.frame_size = get_or<int>(j, "frame_size", 16);
  spec.seed = get_or<std::uint64_t>(j, "seed", 7);
  return spec;
}

// ---- geodesic ----

json geodesic_config_to_json(const geo::GeodesicConfig& cfg) {
  return json{{"num_interior", cfg.num_interior},
              {"iters", cfg.iters},
              {"alpha", cfg.alpha},
              {"epsilon", cfg.epsilon},
              {"mode", cfg.until_convergence ? "convergence" : "fixed"},
              {"max_sweeps", cfg.max_sweeps},
              {"delta_t", cfg.delta_t}};
}

geo::GeodesicConfig geodesic_config_from_json(const json& j) {
  check_keys(j, {"num_interior", "iters", "alpha", "epsilon", "mode", "max_sweeps", "delta_t"},
             "geodesic");
  geo::GeodesicConfig cfg;
  cfg.num_interior = get_or<int>(j, "num_interior", 4);
  cfg.iters = get_or<int>(j, "iters", 16);
  cfg.alpha = get_or<double>(j, "alpha", 0.05);
  cfg.epsilon = get_or<double>(j, "epsilon", 1e-6);
  const std::string mode = get_or<std::string>(j, "mode", "fixed");
  if (mode == "fixed")
    cfg.until_convergence = false;
  else if (mode == "convergence")
    cfg.until_convergence = true;
  else
    raise(ErrorKind::ConfigError, "geodesic.mode must be 'fixed' or 'convergence'");
  cfg.max_sweeps = get_or<int>(j, "max_sweeps", 1000);
  cfg.delta_t = get_or<double>(j, "delta_t", 1.0);
  if (cfg.num_interior < 1) raise(ErrorKind::ConfigError, "geodesic.num_interior must be >= 1");
  if (!(cfg.alpha > 0.0)) raise(ErrorKind::ConfigError, "geodesic.alpha must be > 0");
  return cfg;
}

// ---- predictor ----

json predictor_config_to_json(const PredictorConfig& cfg) {
  return json{{"k", cfg.k},
              {"hidden", cfg.hidden},
              {"loss", cfg.loss == PredictorLoss::Squared ? "squared" : "geodesic"},
              {"geodesic", geodesic_config_to_json(cfg.geodesic)},
              {"geodesic_cache_per_epoch", cfg.geodesic_cache_per_epoch},
              {"lr", cfg.lr},
              {"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size},
              {"seed", cfg.seed}};
}

PredictorConfig predictor_config_from_json(const json& j) {
  check_keys(j,
             {"k", "hidden", "loss", "geodesic", "geodesic_cache_per_epoch", "lr", "epochs",
              "batch_size", "seed"},
             "predictor");
  PredictorConfig cfg;
  cfg.k = get_or<int>(j, "k", 1);
  cfg.hidden = get_or<int>(j, "hidden", 128);
  const std::string loss = get_or<std::string>(j, "loss", "squared");
  if (loss == "squared")
    cfg.loss = PredictorLoss::Squared;
  else if (loss == "geodesic")
    cfg.loss = PredictorLoss::Geodesic;
  else
    raise(ErrorKind::ConfigError, "predictor.loss must be 'squared' or 'geodesic'");
  if (j.contains("geodesic")) cfg.geodesic = geodesic_config_from_json(j.at("geodesic"));
  cfg.geodesic_cache_per_epoch = get_or<bool>(j, "geodesic_cache_per_epoch", false);
  cfg.lr = get_or<double>(j, "lr", 1e-3);
  cfg.epochs = get_or<int>(j, "epochs", 20);
  cfg.batch_size = get_or<int>(j, "batch_size", 64);
  cfg.seed = get_or<std::uint64_t>(j, "seed", 1);
  return cfg;
}

// ---- run config ----

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.model = model_config_from_json(json::object());
  cfg.dataset = dataset_spec_from_json(json::object());
  cfg.predictor.geodesic = cfg.geodesic;
  return cfg;
}

RunConfig run_config_from_json(const json& j) {
  check_keys(j, {"dataset", "model", "geodesic", "predictor"}, "config");
  RunConfig cfg;
  cfg.dataset = dataset_spec_from_json(j.contains("dataset") ? j.at("dataset") : json::object());
  if (j.contains("dataset"))
    cfg.dataset_path = get_or<std::string>(j.at("dataset"), "path", std::string());
  cfg.model = model_config_from_json(j.contains("model") ? j.at("model") : json::object());
  cfg.geodesic =
      geodesic_config_from_json(j.contains("geodesic") ? j.at("geodesic") : json::object());
  cfg.predictor =
      predictor_config_from_json(j.contains("predictor") ? j.at("predictor") : json::object());
  if (!j.contains("predictor") || !j.at("predictor").contains("geodesic"))
    cfg.predictor.geodesic = cfg.geodesic;

  // The dataset section owns the sequence geometry; an explicit model
  // geometry must agree with it.
  const json model_j = j.contains("model") ? j.at("model") : json::object();
  const int data_channels = cfg.dataset.pixel_channels();
  if (model_j.contains("n_frames") && cfg.model.n_frames != cfg.dataset.n_frames)
    raise(ErrorKind::ConfigError, "model.n_frames conflicts with dataset.n_frames");
  if (model_j.contains("frame_channels") && cfg.model.frame_channels != data_channels)
    raise(ErrorKind::ConfigError, "model.frame_channels conflicts with dataset family");
  cfg.model.n_frames = cfg.dataset.n_frames;
  cfg.model.frame_channels = data_channels;
  cfg.model.frame_height = cfg.dataset.frame_size;
  cfg.model.frame_width = cfg.dataset.frame_size;
  for (auto& ch : cfg.model.channels) ch.n_frames = cfg.model.n_frames;
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  json j{{"dataset", dataset_spec_to_json(cfg.dataset)},
         {"model", model_config_to_json(cfg.model)},
         {"geodesic", geodesic_config_to_json(cfg.geodesic)},
         {"predictor", predictor_config_to_json(cfg.predictor)}};
  if (!cfg.dataset_path.empty()) j["dataset"]["path"] = cfg.dataset_path;
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) raise(ErrorKind::ConfigError, "cannot open config file " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    raise(ErrorKind::ConfigError, "config parse error: " + std::string(e.what()));
  }
  return run_config_from_json(j);
}

}  // namespace mgp
