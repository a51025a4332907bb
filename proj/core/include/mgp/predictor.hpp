#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgp/geodesic.hpp"
#include "mgp/vae.hpp"

namespace mgp {

// Latent-space frame prediction: a three-layer ReLU MLP maps the first
// n-k latent frames (posterior means) to the last k. Trained with either
// plain squared distance to the encoder target or with the geodesic loss,
// where the regression target is the first interior point z_1 of the
// refined geodesic from the prediction to the encoder target. z_1 is
// recomputed per step and treated as a constant (no gradient through the
// geodesic solver).

enum class PredictorLoss { Squared, Geodesic };

struct PredictorConfig {
  int k = 1;
  int hidden = 128;
  PredictorLoss loss = PredictorLoss::Squared;
  geo::GeodesicConfig geodesic;
  bool geodesic_cache_per_epoch = false;  // recompute targets once per epoch
  double lr = 1e-3;
  int epochs = 20;
  int batch_size = 64;
  std::uint64_t seed = 1;
};

nlohmann::json predictor_config_to_json(const PredictorConfig& cfg);
PredictorConfig predictor_config_from_json(const nlohmann::json& j);

template <typename T>
class PredictorModel {
 public:
  PredictorModel(int n_frames, int d, PredictorConfig cfg)
      : cfg_(std::move(cfg)), n_frames_(n_frames), d_(d) {
    if (cfg_.k < 1 || cfg_.k >= n_frames_)
      raise(ErrorKind::ConfigError, "predictor: k must satisfy 1 <= k < n_frames");
    if (cfg_.hidden < 1) raise(ErrorKind::ConfigError, "predictor: hidden must be >= 1");
    auto rng = rng::Engine::derive(cfg_.seed, kInitStream);
    l1_ = nn::add_linear(store_, "pred.l1", in_dim(), cfg_.hidden, rng);
    l2_ = nn::add_linear(store_, "pred.l2", cfg_.hidden, cfg_.hidden, rng);
    l3_ = nn::add_linear(store_, "pred.l3", cfg_.hidden, out_dim(), rng);
  }

  const PredictorConfig& config() const { return cfg_; }
  int n_frames() const { return n_frames_; }
  int d() const { return d_; }
  int in_dim() const { return (n_frames_ - cfg_.k) * d_; }
  int out_dim() const { return cfg_.k * d_; }
  nn::ParamStore<T>& params() { return store_; }
  const nn::ParamStore<T>& params() const { return store_; }

  // x: {B, in_dim} -> {B, out_dim}; ReLU between layers, linear output.
  ad::Var<T> predict(ad::Tape<T>& tape, ad::Var<T> x, const std::vector<ad::Var<T>>& P) const {
    auto h1 = tape.relu(nn::linear(tape, P, l1_, x));
    auto h2 = tape.relu(nn::linear(tape, P, l2_, h1));
    return nn::linear(tape, P, l3_, h2);
  }

  std::vector<double> predict_one(std::span<const double> prefix) const {
    if (prefix.size() != static_cast<std::size_t>(in_dim()))
      raise(ErrorKind::ShapeMismatch, "predict: prefix length != (n-k)*d");
    ad::Tape<T> tape;
    auto P = store_.leaves(tape, false);
    std::vector<T> buf(prefix.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<T>(prefix[i]);
    auto x = tape.constant({1, in_dim()}, buf);
    auto y = predict(tape, x, P);
    auto v = y.value();
    return std::vector<double>(v.begin(), v.end());
  }

  CheckpointData to_checkpoint(const std::string& rng_state) const {
    CheckpointData ckpt;
    ckpt.role = "predictor";
    ckpt.config = predictor_config_to_json(cfg_);
    ckpt.config["n_frames"] = n_frames_;
    ckpt.config["d"] = d_;
    ckpt.rng_state = rng_state;
    VaeModel<T>::append_store_tensors(store_, ckpt);
    return ckpt;
  }

  static PredictorModel<T> from_checkpoint(const CheckpointData& ckpt) {
    if (ckpt.role != "predictor")
      raise(ErrorKind::ConfigMismatch, "checkpoint role '" + ckpt.role + "' is not 'predictor'");
    nlohmann::json cfg_json = ckpt.config;
    const int n_frames = cfg_json.at("n_frames").get<int>();
    const int d = cfg_json.at("d").get<int>();
    cfg_json.erase("n_frames");
    cfg_json.erase("d");
    PredictorModel<T> model(n_frames, d, predictor_config_from_json(cfg_json));
    VaeModel<T>::restore_store_tensors(ckpt, model.store_);
    return model;
  }

 private:
  static constexpr std::uint64_t kInitStream = 2;

  PredictorConfig cfg_;
  int n_frames_;
  int d_;
  nn::ParamStore<T> store_;
  nn::LinearIds l1_, l2_, l3_;
};

// The decoder as a map from k latent frame-slices to k frames, the manifold
// the geodesic loss runs on. Framewise decoding with shared weights.
template <typename T>
class DecoderManifold : public geo::DifferentiableMap<T> {
 public:
  DecoderManifold(const VaeModel<T>& model, int k) : model_(&model), k_(k) {
    if (k < 1) raise(ErrorKind::ConfigError, "DecoderManifold: k must be >= 1");
  }

  int in_dim() const override { return k_ * model_->config().d(); }
  int out_dim() const override { return k_ * model_->config().frame_px(); }

  ad::Var<T> build(ad::Tape<T>& tape, ad::Var<T> z) const override {
    auto P = model_->params().leaves(tape, false);
    auto rows = tape.reshape(z, {k_, model_->config().d()});
    auto frames = model_->decode_rows(tape, rows, P);
    return tape.reshape(frames, {k_ * model_->config().frame_px()});
  }

 private:
  const VaeModel<T>* model_;
  int k_;
};

// Latent features for prediction: flatten((n-k) x d) frame-major prefixes and
// (k x d) targets, both from posterior means.
struct LatentSplit {
  int count = 0;
  int in_dim = 0;
  int out_dim = 0;
  std::vector<float> prefix;  // count x in_dim
  std::vector<float> target;  // count x out_dim
};

LatentSplit split_latents(const LatentCode& code, int k);

struct PredictorTrainResult {
  PredictorModel<float> model;
  std::vector<double> epoch_loss;  // mean per-sequence training loss
  std::string rng_state;
};

PredictorTrainResult train_predictor(const VaeModel<float>& vae, const data::Dataset& dataset,
                                     const PredictorConfig& cfg);

struct PredictionMetrics {
  double mse = 0.0;  // squared pixel error, summed per frame pair, mean over sequences
  double bce = 0.0;  // binary cross-entropy after [-1,1] -> [0,1] rescale, same reduction
};

PredictionMetrics evaluate_prediction(const VaeModel<float>& vae,
                                      const PredictorModel<float>& predictor,
                                      const data::Dataset& dataset, int k);

// Metric helper: BCE sum over one frame pair, pixels in [-1, 1]; probability
// arguments are clamped at 1e-12 so exact 0/1 targets stay finite.
double bce_frame_sum(std::span<const float> pred, std::span<const float> target);

}  // namespace mgp
