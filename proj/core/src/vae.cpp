#include "mgp/vae.hpp"

#include <algorithm>
#include <numeric>
#include <cstdio>

namespace mgp {

void ModelConfig::validate() const {
  if (channels.empty()) raise(ErrorKind::ConfigError, "model: needs at least one channel");
  if (n_frames < 1 || frame_channels < 1 || frame_height < 1 || frame_width < 1)
    raise(ErrorKind::ConfigError, "model: frame dims must be positive");
  if (beta < 0.0) raise(ErrorKind::ConfigError, "model: beta must be >= 0");
  if (!(lr > 0.0)) raise(ErrorKind::ConfigError, "model: lr must be > 0");
  if (epochs < 1 || batch_size < 1) raise(ErrorKind::ConfigError, "model: epochs/batch_size must be >= 1");
  if (enc_hidden1 < 1 || enc_hidden2 < 1 || head_hidden < 1 || dec_hidden1 < 1 || dec_hidden2 < 1)
    raise(ErrorKind::ConfigError, "model: hidden sizes must be >= 1");
  for (const auto& ch : channels) {
    if (ch.n_frames != n_frames)
      raise(ErrorKind::MixedFrameCounts, "model: channel n_frames != model n_frames");
    ch.validate();
  }
}

std::vector<PriorTerms> build_prior_terms(const std::vector<gp::GpChannelSpec>& specs) {
  auto bank = gp::build_prior_bank(specs);
  std::vector<PriorTerms> terms;
  terms.reserve(bank.size());
  for (auto& path : bank) {
    PriorTerms t;
    t.inv_chol = linalg::inverse_lower(path.chol);
    t.log_det = linalg::log_det_from_chol(path.chol);
    t.path = std::move(path);
    terms.push_back(std::move(t));
  }
  return terms;
}

TrainResult train_vae(const data::Dataset& dataset, const ModelConfig& cfg, bool log_epochs) {
  ModelConfig resolved = cfg;
  for (auto& ch : resolved.channels) ch.n_frames = resolved.n_frames;
  resolved.validate();
  dataset.video.check_dims(resolved.n_frames, resolved.frame_channels, resolved.frame_height,
                           resolved.frame_width);
  if (dataset.video.batch < 1) raise(ErrorKind::EmptyDataset, "train: dataset is empty");

  const auto priors = build_prior_terms(resolved.channels);
  VaeModel<float> model(resolved);
  auto train_rng = rng::Engine::derive(resolved.seed, 1);
  const ad::AdamConfig adam{resolved.lr, 0.9, 0.999, 1e-8};

  const int S = dataset.video.batch;
  const int n = resolved.n_frames;
  const int d = resolved.d();
  const std::int64_t seq_px = dataset.video.seq_px();

  std::vector<int> order(static_cast<std::size_t>(S));
  std::iota(order.begin(), order.end(), 0);

  TrainResult result{std::move(model), {}, {}};
  std::vector<float> xbuf;
  std::vector<float> noise;

  for (int epoch = 0; epoch < resolved.epochs; ++epoch) {
    train_rng.shuffle(order);
    EpochStats stats;
    stats.kl.assign(static_cast<std::size_t>(d), 0.0);
    for (int start = 0; start < S; start += resolved.batch_size) {
      const int B = std::min(resolved.batch_size, S - start);
      xbuf.resize(static_cast<std::size_t>(B) * seq_px);
      for (int b = 0; b < B; ++b) {
        auto seq = dataset.video.sequence(order[static_cast<std::size_t>(start + b)]);
        std::copy(seq.begin(), seq.end(), xbuf.begin() + static_cast<std::ptrdiff_t>(b) * seq_px);
      }
      noise.resize(static_cast<std::size_t>(B) * d * n);
      for (auto& v : noise) v = static_cast<float>(train_rng.normal());

      ad::Tape<float> tape;
      auto P = result.model.params().leaves(tape);
      auto parts = result.model.elbo(tape, P, xbuf, B, priors, resolved.beta, noise);
      tape.backward(parts.loss);
      result.model.params().apply_adam(P, adam);

      stats.recon += static_cast<double>(parts.recon.scalar()) * B;
      for (int c = 0; c < d; ++c)
        stats.kl[static_cast<std::size_t>(c)] +=
            static_cast<double>(parts.kl[static_cast<std::size_t>(c)].scalar()) * B;
      stats.total += static_cast<double>(parts.loss.scalar()) * B;
    }
    stats.recon /= S;
    stats.total /= S;
    for (auto& k : stats.kl) k /= S;
    result.history.push_back(stats);
    if (log_epochs) {
      std::printf("epoch %d recon %.4f", epoch + 1, stats.recon);
      for (int c = 0; c < d; ++c) std::printf(" kl%d %.4f", c, stats.kl[static_cast<std::size_t>(c)]);
      std::printf(" total %.4f\n", stats.total);
      std::fflush(stdout);
    }
  }
  result.rng_state = train_rng.save_state();
  return result;
}

std::pair<VideoBatch, VideoBatch> swap_channels(const VaeModel<float>& model, const VideoBatch& a,
                                                const VideoBatch& b, int channel_index) {
  if (channel_index < 0 || channel_index >= model.config().d())
    raise(ErrorKind::BadChannelIndex,
          "swap: channel " + std::to_string(channel_index) + " out of range [0, " +
              std::to_string(model.config().d()) + ")");
  if (a.batch != b.batch)
    raise(ErrorKind::DimensionMismatch, "swap: inputs must have the same batch size");
  auto za = model.encode_means(a);
  auto zb = model.encode_means(b);
  for (int s = 0; s < a.batch; ++s)
    for (int t = 0; t < model.config().n_frames; ++t)
      std::swap(za.at(s, channel_index, t), zb.at(s, channel_index, t));
  return {model.decode(za), model.decode(zb)};
}

}  // namespace mgp
