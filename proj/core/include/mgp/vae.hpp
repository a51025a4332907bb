#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgp/checkpoint.hpp"
#include "mgp/datasets.hpp"
#include "mgp/gp_prior.hpp"
#include "mgp/nn.hpp"
#include "mgp/video.hpp"

namespace mgp {

// MGP-VAE: encoder emits a per-channel full-covariance Gaussian posterior
// over the n frames (mean + Cholesky factor), the prior is an independent
// bank of GP channels, and the decoder maps each frame's latent slice
// (z^(1)_t, ..., z^(d)_t) to a frame with shared weights.
//
// Networks are fully connected. The conv/deconv stack the architecture is
// usually paired with adds nothing to the latent-space machinery and is out
// of scope at this scale; every covariance/KL/sampling path is exact.

struct ModelConfig {
  std::vector<gp::GpChannelSpec> channels;
  double beta = 2.0;
  double lr = 1e-3;
  int epochs = 200;
  int batch_size = 32;
  int n_frames = 8;
  int frame_channels = 1;
  int frame_height = 16;
  int frame_width = 16;
  int enc_hidden1 = 256;
  int enc_hidden2 = 128;
  int head_hidden = 128;
  int dec_hidden1 = 128;
  int dec_hidden2 = 256;
  std::uint64_t seed = 1;

  int d() const { return static_cast<int>(channels.size()); }
  int frame_px() const { return frame_channels * frame_height * frame_width; }
  int packed_len() const { return n_frames * (n_frames + 1) / 2; }
  void validate() const;
};

// JSON converters live with the config module.
nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

// Per-sequence, per-channel encoder output (numeric view).
struct PosteriorChannel {
  std::vector<double> mu;
  linalg::LowerTriangular chol;
};
struct PosteriorBank {
  std::vector<PosteriorChannel> channels;
};

// Prior-side constants of the KL: with S0 = L0 L0^T fixed,
//   tr(S0^-1 S1) = ||L0^-1 L1||_F^2 and <dmu, S0^-1 dmu> = ||L0^-1 dmu||^2,
// so the differentiable KL only ever multiplies by the constant L0^-1.
struct PriorTerms {
  gp::GaussianPath path;
  linalg::LowerTriangular inv_chol;
  double log_det = 0.0;
};

std::vector<PriorTerms> build_prior_terms(const std::vector<gp::GpChannelSpec>& specs);

struct EpochStats {
  double recon = 0.0;
  std::vector<double> kl;
  double total = 0.0;
};

template <typename T>
class VaeModel {
 public:
  explicit VaeModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
    for (auto& ch : cfg_.channels) ch.n_frames = cfg_.n_frames;
    cfg_.validate();
    auto rng = rng::Engine::derive(cfg_.seed, kInitStream);
    const int px = cfg_.frame_px();
    const int n = cfg_.n_frames;
    const int m = cfg_.packed_len();
    enc1_ = nn::add_linear(store_, "enc.l1", px, cfg_.enc_hidden1, rng);
    enc2_ = nn::add_linear(store_, "enc.l2", cfg_.enc_hidden1, cfg_.enc_hidden2, rng);
    heads_.resize(static_cast<std::size_t>(cfg_.d()));
    for (int c = 0; c < cfg_.d(); ++c) {
      const std::string base = "enc.head" + std::to_string(c);
      heads_[static_cast<std::size_t>(c)][0] =
          nn::add_linear(store_, base + ".l1", n * cfg_.enc_hidden2, cfg_.head_hidden, rng);
      heads_[static_cast<std::size_t>(c)][1] =
          nn::add_linear(store_, base + ".out", cfg_.head_hidden, n + m, rng);
    }
    dec1_ = nn::add_linear(store_, "dec.l1", cfg_.d(), cfg_.dec_hidden1, rng);
    dec2_ = nn::add_linear(store_, "dec.l2", cfg_.dec_hidden1, cfg_.dec_hidden2, rng);
    dec3_ = nn::add_linear(store_, "dec.l3", cfg_.dec_hidden2, px, rng);
  }

  const ModelConfig& config() const { return cfg_; }
  nn::ParamStore<T>& params() { return store_; }
  const nn::ParamStore<T>& params() const { return store_; }

  struct Encoded {
    std::vector<ad::Var<T>> mu;      // per channel, {B, n}
    std::vector<ad::Var<T>> packed;  // per channel, {B, n(n+1)/2}
    std::vector<ad::Var<T>> chol;    // per channel, {B, n, n}
  };

  // x_rows: {B*n, frame_px}, frames of a sequence contiguous.
  Encoded encode(ad::Tape<T>& tape, ad::Var<T> x_rows,
                 const std::vector<ad::Var<T>>& P) const {
    const int n = cfg_.n_frames;
    const int m = cfg_.packed_len();
    const std::int64_t rows = x_rows.shape()[0];
    const int batch = static_cast<int>(rows / n);
    auto h1 = tape.elu(nn::linear(tape, P, enc1_, x_rows));
    auto h2 = tape.elu(nn::linear(tape, P, enc2_, h1));
    auto flat = tape.reshape(h2, {batch, n * cfg_.enc_hidden2});
    Encoded enc;
    for (int c = 0; c < cfg_.d(); ++c) {
      auto hh = tape.elu(nn::linear(tape, P, heads_[static_cast<std::size_t>(c)][0], flat));
      auto out = nn::linear(tape, P, heads_[static_cast<std::size_t>(c)][1], hh);
      auto mu = tape.slice(out, 1, 0, n);
      auto packed = tape.slice(out, 1, n, m);
      enc.mu.push_back(mu);
      enc.packed.push_back(packed);
      enc.chol.push_back(tape.tril_from_packed(packed, n));
    }
    return enc;
  }

  // z_rows: {R, d} frame-slices; returns {R, frame_px} in (-1, 1).
  ad::Var<T> decode_rows(ad::Tape<T>& tape, ad::Var<T> z_rows,
                         const std::vector<ad::Var<T>>& P) const {
    auto h1 = tape.elu(nn::linear(tape, P, dec1_, z_rows));
    auto h2 = tape.elu(nn::linear(tape, P, dec2_, h1));
    return tape.tanh(nn::linear(tape, P, dec3_, h2));
  }

  // Reparameterized latent: z = mu + L xi per channel; exactly one sample.
  // noise is laid out [sequence][channel][frame].
  std::vector<ad::Var<T>> reparam(ad::Tape<T>& tape, const Encoded& enc,
                                  std::span<const T> noise, int batch) const {
    const int n = cfg_.n_frames;
    const int d = cfg_.d();
    if (noise.size() != static_cast<std::size_t>(batch) * d * n)
      raise(ErrorKind::ShapeMismatch, "reparam: noise length != batch*d*n");
    std::vector<ad::Var<T>> z;
    std::vector<T> buf(static_cast<std::size_t>(batch) * n);
    for (int c = 0; c < d; ++c) {
      for (int b = 0; b < batch; ++b)
        for (int t = 0; t < n; ++t)
          buf[static_cast<std::size_t>(b) * n + t] =
              noise[(static_cast<std::size_t>(b) * d + c) * n + t];
      auto xi = tape.constant({batch, n, 1}, buf);
      auto lxi = tape.matmul(enc.chol[static_cast<std::size_t>(c)], xi);
      z.push_back(tape.add(enc.mu[static_cast<std::size_t>(c)],
                           tape.reshape(lxi, {batch, n})));
    }
    return z;
  }

  // Latent frame rows {B*n, d} from per-channel {B, n} codes.
  ad::Var<T> latent_rows(ad::Tape<T>& tape, const std::vector<ad::Var<T>>& z, int batch) const {
    const int n = cfg_.n_frames;
    std::vector<ad::Var<T>> cols;
    cols.reserve(z.size());
    for (auto zc : z) cols.push_back(tape.reshape(zc, {batch * n, 1}));
    return tape.concat(std::span<const ad::Var<T>>(cols.data(), cols.size()), 1);
  }

  struct ElboParts {
    ad::Var<T> loss;
    ad::Var<T> recon;
    std::vector<ad::Var<T>> kl;  // per channel, batch-averaged
  };

  // loss = recon + beta * sum_c KL_c with
  //   recon = sum of squared pixel errors, averaged over the batch,
  //   KL_c  = full-covariance KL(posterior_c || prior_c), batch average.
  ElboParts elbo(ad::Tape<T>& tape, const std::vector<ad::Var<T>>& P,
                 std::span<const float> batch_pixels, int batch,
                 const std::vector<PriorTerms>& priors, double beta,
                 std::span<const T> noise) const {
    const int n = cfg_.n_frames;
    const int px = cfg_.frame_px();
    const int m = cfg_.packed_len();
    if (priors.size() != static_cast<std::size_t>(cfg_.d()))
      raise(ErrorKind::DimensionMismatch, "elbo: prior bank size != d");
    if (batch_pixels.size() != static_cast<std::size_t>(batch) * n * px)
      raise(ErrorKind::ShapeMismatch, "elbo: pixel buffer size mismatch");

    std::vector<T> xbuf(batch_pixels.size());
    for (std::size_t i = 0; i < xbuf.size(); ++i) xbuf[i] = static_cast<T>(batch_pixels[i]);
    auto x = tape.constant({batch * n, px}, xbuf);

    auto enc = encode(tape, x, P);
    auto z = reparam(tape, enc, noise, batch);
    auto xhat = decode_rows(tape, latent_rows(tape, z, batch), P);
    auto recon = tape.scale_shift(tape.sum_squares(tape.sub(xhat, x)), 1.0 / batch, 0.0);

    ElboParts parts{recon, recon, {}};
    ad::Var<T> kl_total;
    for (int c = 0; c < cfg_.d(); ++c) {
      const auto& prior = priors[static_cast<std::size_t>(c)];
      // constants: A = L0^-1 tiled per batch, mu0 tiled per batch
      std::vector<T> abuf(static_cast<std::size_t>(n) * n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          abuf[static_cast<std::size_t>(i) * n + j] = static_cast<T>(prior.inv_chol.at(i, j));
      auto A = tape.constant({n, n}, abuf);
      std::vector<T> mu0(static_cast<std::size_t>(batch) * n);
      for (int b = 0; b < batch; ++b)
        for (int t = 0; t < n; ++t)
          mu0[static_cast<std::size_t>(b) * n + t] =
              static_cast<T>(prior.path.mean[static_cast<std::size_t>(t)]);
      auto mu0v = tape.constant({batch, n}, mu0);

      auto dmu = tape.reshape(tape.sub(enc.mu[static_cast<std::size_t>(c)], mu0v), {batch, n, 1});
      auto quad = tape.sum_squares(tape.matmul(A, dmu));
      auto trace = tape.sum_squares(tape.matmul(A, enc.chol[static_cast<std::size_t>(c)]));

      // log det S1 per element = 2 * sum of raw diagonal entries.
      std::vector<std::int64_t> diag_idx;
      diag_idx.reserve(static_cast<std::size_t>(batch) * n);
      for (int b = 0; b < batch; ++b)
        for (int i = 0; i < n; ++i)
          diag_idx.push_back(static_cast<std::int64_t>(b) * m + i * (i + 1) / 2 + i);
      auto sdiag = tape.sum(tape.select(enc.packed[static_cast<std::size_t>(c)], diag_idx));

      auto inner = tape.add(tape.add(trace, quad), tape.scale_shift(sdiag, -2.0, 0.0));
      auto kl_c = tape.scale_shift(inner, 1.0 / (2.0 * batch), 0.5 * (prior.log_det - n));
      parts.kl.push_back(kl_c);
      kl_total = (c == 0) ? kl_c : tape.add(kl_total, kl_c);
    }
    parts.loss = tape.add(recon, tape.scale_shift(kl_total, beta, 0.0));
    return parts;
  }

  // ---- numeric (tape-free API) paths ----

  std::vector<PosteriorBank> encode_posterior(const VideoBatch& video) const {
    video.check_dims(cfg_.n_frames, cfg_.frame_channels, cfg_.frame_height, cfg_.frame_width);
    const int n = cfg_.n_frames;
    const int px = cfg_.frame_px();
    std::vector<PosteriorBank> banks(static_cast<std::size_t>(video.batch));
    const int chunk = 512;
    for (int s0 = 0; s0 < video.batch; s0 += chunk) {
      const int B = std::min(chunk, video.batch - s0);
      ad::Tape<T> tape;
      auto P = store_.leaves(tape, false);
      std::vector<T> xbuf(static_cast<std::size_t>(B) * n * px);
      for (int b = 0; b < B; ++b) {
        auto seq = video.sequence(s0 + b);
        for (std::int64_t i = 0; i < video.seq_px(); ++i)
          xbuf[static_cast<std::size_t>(b) * video.seq_px() + i] = static_cast<T>(seq[i]);
      }
      auto x = tape.constant({B * n, px}, xbuf);
      auto enc = encode(tape, x, P);
      for (int b = 0; b < B; ++b) {
        PosteriorBank& bank = banks[static_cast<std::size_t>(s0 + b)];
        bank.channels.resize(static_cast<std::size_t>(cfg_.d()));
        for (int c = 0; c < cfg_.d(); ++c) {
          auto mu = enc.mu[static_cast<std::size_t>(c)].value();
          auto chol = enc.chol[static_cast<std::size_t>(c)].value();
          PosteriorChannel& pc = bank.channels[static_cast<std::size_t>(c)];
          pc.mu.resize(static_cast<std::size_t>(n));
          for (int t = 0; t < n; ++t)
            pc.mu[static_cast<std::size_t>(t)] =
                static_cast<double>(mu[static_cast<std::size_t>(b) * n + t]);
          pc.chol = linalg::LowerTriangular(n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j)
              pc.chol.set(i, j, static_cast<double>(
                                    chol[(static_cast<std::size_t>(b) * n + i) * n + j]));
        }
      }
    }
    return banks;
  }

  // Posterior means only, as a LatentCode [b][c][t].
  LatentCode encode_means(const VideoBatch& video) const {
    auto banks = encode_posterior(video);
    LatentCode code = LatentCode::zeros(video.batch, cfg_.d(), cfg_.n_frames);
    for (int b = 0; b < video.batch; ++b)
      for (int c = 0; c < cfg_.d(); ++c)
        for (int t = 0; t < cfg_.n_frames; ++t)
          code.at(b, c, t) =
              banks[static_cast<std::size_t>(b)].channels[static_cast<std::size_t>(c)]
                  .mu[static_cast<std::size_t>(t)];
    return code;
  }

  VideoBatch decode(const LatentCode& code) const {
    if (code.d != cfg_.d() || code.n_frames != cfg_.n_frames)
      raise(ErrorKind::ShapeMismatch, "decode: latent dims do not match model");
    const int n = cfg_.n_frames;
    const int px = cfg_.frame_px();
    VideoBatch out = VideoBatch::zeros(code.batch, n, cfg_.frame_channels, cfg_.frame_height,
                                       cfg_.frame_width);
    const int chunk = 512;
    for (int s0 = 0; s0 < code.batch; s0 += chunk) {
      const int B = std::min(chunk, code.batch - s0);
      ad::Tape<T> tape;
      auto P = store_.leaves(tape, false);
      std::vector<T> zbuf(static_cast<std::size_t>(B) * n * cfg_.d());
      for (int b = 0; b < B; ++b)
        for (int t = 0; t < n; ++t)
          for (int c = 0; c < cfg_.d(); ++c)
            zbuf[(static_cast<std::size_t>(b) * n + t) * cfg_.d() + c] =
                static_cast<T>(code.at(s0 + b, c, t));
      auto rows = tape.constant({B * n, cfg_.d()}, zbuf);
      auto xhat = decode_rows(tape, rows, P);
      auto v = xhat.value();
      for (int b = 0; b < B; ++b)
        for (std::int64_t i = 0; i < out.seq_px(); ++i)
          out.sequence(s0 + b)[static_cast<std::size_t>(i)] =
              static_cast<float>(v[static_cast<std::size_t>(b) * n * px + i]);
    }
    return out;
  }

  // ---- checkpointing ----

  CheckpointData to_checkpoint(const std::string& rng_state) const {
    CheckpointData ckpt;
    ckpt.role = "vae";
    ckpt.config = model_config_to_json(cfg_);
    ckpt.rng_state = rng_state;
    append_store_tensors(store_, ckpt);
    return ckpt;
  }

  static VaeModel<T> from_checkpoint(const CheckpointData& ckpt) {
    if (ckpt.role != "vae")
      raise(ErrorKind::ConfigMismatch, "checkpoint role '" + ckpt.role + "' is not 'vae'");
    VaeModel<T> model(model_config_from_json(ckpt.config));
    restore_store_tensors(ckpt, model.store_);
    return model;
  }

  static void append_store_tensors(const nn::ParamStore<T>& store, CheckpointData& ckpt) {
    std::int64_t step = 0;
    for (std::size_t i = 0; i < store.size(); ++i) {
      const auto& p = store[static_cast<int>(i)];
      ckpt.tensors.push_back({p.name, p.shape, to_f32(p.value)});
      step = std::max<std::int64_t>(step, p.opt.step);
    }
    for (std::size_t i = 0; i < store.size(); ++i) {
      const auto& p = store[static_cast<int>(i)];
      if (p.opt.step == 0) continue;
      ckpt.tensors.push_back({"opt.m." + p.name, p.shape, to_f32(p.opt.m)});
      ckpt.tensors.push_back({"opt.v." + p.name, p.shape, to_f32(p.opt.v)});
    }
    ckpt.tensors.push_back({"opt.step", {1}, {static_cast<float>(step)}});
  }

  static void restore_store_tensors(const CheckpointData& ckpt, nn::ParamStore<T>& store) {
    const std::int64_t step =
        ckpt.has_tensor("opt.step")
            ? static_cast<std::int64_t>(ckpt.tensor("opt.step").data.at(0))
            : 0;
    for (std::size_t i = 0; i < store.size(); ++i) {
      auto& p = store[static_cast<int>(i)];
      const auto& rec = ckpt.tensor(p.name);
      if (rec.shape != p.shape)
        raise(ErrorKind::ConfigMismatch, "checkpoint tensor '" + p.name + "' has wrong shape");
      from_f32(rec.data, p.value);
      if (ckpt.has_tensor("opt.m." + p.name)) {
        p.opt.step = step;
        p.opt.m.resize(p.value.size());
        p.opt.v.resize(p.value.size());
        from_f32(ckpt.tensor("opt.m." + p.name).data, p.opt.m);
        from_f32(ckpt.tensor("opt.v." + p.name).data, p.opt.v);
      }
    }
  }

 private:
  static constexpr std::uint64_t kInitStream = 0;

  static std::vector<float> to_f32(const std::vector<T>& v) {
    std::vector<float> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i]);
    return out;
  }
  static void from_f32(const std::vector<float>& in, std::vector<T>& out) {
    out.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = static_cast<T>(in[i]);
  }

  ModelConfig cfg_;
  nn::ParamStore<T> store_;
  nn::LinearIds enc1_, enc2_;
  std::vector<std::array<nn::LinearIds, 2>> heads_;
  nn::LinearIds dec1_, dec2_, dec3_;
};

struct TrainResult {
  VaeModel<float> model;
  std::vector<EpochStats> history;
  std::string rng_state;
};

TrainResult train_vae(const data::Dataset& dataset, const ModelConfig& cfg,
                      bool log_epochs = false);

// Encode both inputs with posterior means (no sampling noise), exchange one
// latent channel, decode both.
std::pair<VideoBatch, VideoBatch> swap_channels(const VaeModel<float>& model,
                                                const VideoBatch& a, const VideoBatch& b,
                                                int channel_index);

}  // namespace mgp
