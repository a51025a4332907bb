#include "mgp/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mgp/parallel.hpp"

namespace mgp {

LatentSplit split_latents(const LatentCode& code, int k) {
  if (k < 1 || k >= code.n_frames)
    raise(ErrorKind::ConfigError, "split_latents: k must satisfy 1 <= k < n_frames");
  LatentSplit split;
  split.count = code.batch;
  split.in_dim = (code.n_frames - k) * code.d;
  split.out_dim = k * code.d;
  split.prefix.resize(static_cast<std::size_t>(split.count) * split.in_dim);
  split.target.resize(static_cast<std::size_t>(split.count) * split.out_dim);
  const int n = code.n_frames;
  for (int s = 0; s < split.count; ++s) {
    float* px = split.prefix.data() + static_cast<std::size_t>(s) * split.in_dim;
    float* ty = split.target.data() + static_cast<std::size_t>(s) * split.out_dim;
    for (int t = 0; t < n - k; ++t)
      for (int c = 0; c < code.d; ++c) px[t * code.d + c] = static_cast<float>(code.at(s, c, t));
    for (int t = 0; t < k; ++t)
      for (int c = 0; c < code.d; ++c)
        ty[t * code.d + c] = static_cast<float>(code.at(s, c, n - k + t));
  }
  return split;
}

namespace {

// Geodesic targets for a block of (prediction, target) pairs, one independent
// path per sequence; parallel over sequences.
void geodesic_targets(const DecoderManifold<float>& manifold, const geo::GeodesicConfig& gcfg,
                      std::span<const float> preds, std::span<const float> targets, int count,
                      int dim, std::span<float> out) {
  parallel_for(count, [&](std::int64_t s) {
    auto z0 = preds.subspan(static_cast<std::size_t>(s) * dim, static_cast<std::size_t>(dim));
    auto zT = targets.subspan(static_cast<std::size_t>(s) * dim, static_cast<std::size_t>(dim));
    auto z1 = geo::geodesic_target(manifold, z0, zT, gcfg);
    std::copy(z1.begin(), z1.end(), out.begin() + static_cast<std::ptrdiff_t>(s) * dim);
  });
}

}  // namespace

PredictorTrainResult train_predictor(const VaeModel<float>& vae, const data::Dataset& dataset,
                                     const PredictorConfig& cfg) {
  if (dataset.video.batch < 1) raise(ErrorKind::EmptyDataset, "train_predictor: dataset is empty");
  if (dataset.video.n_frames != vae.config().n_frames)
    raise(ErrorKind::ConfigMismatch, "train_predictor: dataset frame count != vae n_frames");

  const auto code = vae.encode_means(dataset.video);
  const auto split = split_latents(code, cfg.k);

  PredictorModel<float> model(vae.config().n_frames, vae.config().d(), cfg);
  DecoderManifold<float> manifold(vae, cfg.k);
  auto train_rng = rng::Engine::derive(cfg.seed, 3);
  const ad::AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};

  const int S = split.count;
  const int in = split.in_dim;
  const int out = split.out_dim;
  std::vector<int> order(static_cast<std::size_t>(S));
  std::iota(order.begin(), order.end(), 0);

  PredictorTrainResult result{std::move(model), {}, {}};
  std::vector<float> xbuf, ybuf, z1buf, cached_targets;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    train_rng.shuffle(order);

    if (cfg.loss == PredictorLoss::Geodesic && cfg.geodesic_cache_per_epoch) {
      // One geodesic solve per sequence per epoch, from the current
      // predictions; targets then stay fixed for the epoch's batches.
      cached_targets.resize(static_cast<std::size_t>(S) * out);
      std::vector<float> preds(static_cast<std::size_t>(S) * out);
      ad::Tape<float> tape;
      auto P = result.model.params().leaves(tape, false);
      auto x = tape.constant({S, in}, split.prefix);
      auto yhat = result.model.predict(tape, x, P);
      auto v = yhat.value();
      std::copy(v.begin(), v.end(), preds.begin());
      geodesic_targets(manifold, cfg.geodesic, preds, split.target, S, out, cached_targets);
    }

    double epoch_loss = 0.0;
    for (int start = 0; start < S; start += cfg.batch_size) {
      const int B = std::min(cfg.batch_size, S - start);
      xbuf.resize(static_cast<std::size_t>(B) * in);
      ybuf.resize(static_cast<std::size_t>(B) * out);
      for (int b = 0; b < B; ++b) {
        const int s = order[static_cast<std::size_t>(start + b)];
        std::copy_n(split.prefix.begin() + static_cast<std::ptrdiff_t>(s) * in, in,
                    xbuf.begin() + static_cast<std::ptrdiff_t>(b) * in);
        std::copy_n(split.target.begin() + static_cast<std::ptrdiff_t>(s) * out, out,
                    ybuf.begin() + static_cast<std::ptrdiff_t>(b) * out);
      }

      ad::Tape<float> tape;
      auto P = result.model.params().leaves(tape);
      auto x = tape.constant({B, in}, xbuf);
      auto yhat = result.model.predict(tape, x, P);

      ad::Var<float> target;
      if (cfg.loss == PredictorLoss::Squared) {
        target = tape.constant({B, out}, ybuf);
      } else if (cfg.geodesic_cache_per_epoch) {
        z1buf.resize(static_cast<std::size_t>(B) * out);
        for (int b = 0; b < B; ++b) {
          const int s = order[static_cast<std::size_t>(start + b)];
          std::copy_n(cached_targets.begin() + static_cast<std::ptrdiff_t>(s) * out, out,
                      z1buf.begin() + static_cast<std::ptrdiff_t>(b) * out);
        }
        target = tape.constant({B, out}, z1buf);
      } else {
        z1buf.resize(static_cast<std::size_t>(B) * out);
        auto v = yhat.value();
        geodesic_targets(manifold, cfg.geodesic, v, ybuf, B, out, z1buf);
        target = tape.constant({B, out}, z1buf);
      }

      auto loss = tape.scale_shift(tape.sum_squares(tape.sub(yhat, target)), 1.0 / B, 0.0);
      tape.backward(loss);
      result.model.params().apply_adam(P, adam);
      epoch_loss += static_cast<double>(loss.scalar()) * B;
    }
    result.epoch_loss.push_back(epoch_loss / S);
  }
  result.rng_state = train_rng.save_state();
  return result;
}

double bce_frame_sum(std::span<const float> pred, std::span<const float> target) {
  if (pred.size() != target.size())
    raise(ErrorKind::DimensionMismatch, "bce_frame_sum: frame sizes differ");
  constexpr double eps = 1e-12;
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = (static_cast<double>(pred[i]) + 1.0) * 0.5;
    const double t = (static_cast<double>(target[i]) + 1.0) * 0.5;
    acc -= t * std::log(std::max(p, eps)) + (1.0 - t) * std::log(std::max(1.0 - p, eps));
  }
  return acc;
}

PredictionMetrics evaluate_prediction(const VaeModel<float>& vae,
                                      const PredictorModel<float>& predictor,
                                      const data::Dataset& dataset, int k) {
  if (dataset.video.batch < 1) raise(ErrorKind::EmptyDataset, "evaluate: dataset is empty");
  if (k != predictor.config().k)
    raise(ErrorKind::ConfigMismatch, "evaluate: k does not match the predictor checkpoint");
  if (dataset.video.n_frames != vae.config().n_frames)
    raise(ErrorKind::ConfigMismatch, "evaluate: dataset frame count != vae n_frames");

  const auto code = vae.encode_means(dataset.video);
  const auto split = split_latents(code, k);
  const int S = split.count;
  const int in = split.in_dim;
  const int out = split.out_dim;
  const int d = vae.config().d();
  const int n = vae.config().n_frames;

  // Predict all suffix latents in one pass, decode framewise, then score.
  LatentCode pred_code = LatentCode::zeros(S, d, k);
  {
    ad::Tape<float> tape;
    auto P = predictor.params().leaves(tape, false);
    auto x = tape.constant({S, in}, split.prefix);
    auto yhat = predictor.predict(tape, x, P);
    auto v = yhat.value();
    for (int s = 0; s < S; ++s)
      for (int t = 0; t < k; ++t)
        for (int c = 0; c < d; ++c)
          pred_code.at(s, c, t) =
              static_cast<double>(v[static_cast<std::size_t>(s) * out + t * d + c]);
  }
  const VideoBatch decoded = vae.decode(pred_code);

  std::vector<double> mse(static_cast<std::size_t>(S), 0.0);
  std::vector<double> bce(static_cast<std::size_t>(S), 0.0);
  parallel_for(S, [&](std::int64_t s) {
    double m = 0.0, b = 0.0;
    for (int t = 0; t < k; ++t) {
      auto ph = decoded.frame(static_cast<int>(s), t);
      auto gt = dataset.video.frame(static_cast<int>(s), n - k + t);
      for (std::size_t i = 0; i < ph.size(); ++i) {
        const double dv = static_cast<double>(ph[i]) - static_cast<double>(gt[i]);
        m += dv * dv;
      }
      b += bce_frame_sum(ph, gt);
    }
    mse[static_cast<std::size_t>(s)] = m;
    bce[static_cast<std::size_t>(s)] = b;
  });

  PredictionMetrics metrics;
  for (int s = 0; s < S; ++s) {
    metrics.mse += mse[static_cast<std::size_t>(s)];
    metrics.bce += bce[static_cast<std::size_t>(s)];
  }
  metrics.mse /= S;
  metrics.bce /= S;
  return metrics;
}

}  // namespace mgp
