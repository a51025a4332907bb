#include "mgp/gp_prior.hpp"

#include <cmath>
#include <string>

namespace mgp::gp {

std::vector<double> GpChannelSpec::grid() const {
  if (!time_grid.empty()) return time_grid;
  std::vector<double> g(static_cast<std::size_t>(n_frames));
  for (int t = 0; t < n_frames; ++t) g[static_cast<std::size_t>(t)] = t + 1;
  return g;
}

double GpChannelSpec::bridge_horizon() const {
  return horizon > 0.0 ? horizon : static_cast<double>(n_frames) + 1.0;
}

void GpChannelSpec::validate() const {
  if (n_frames < 1) raise(ErrorKind::ConfigError, "channel: n_frames must be >= 1");
  if (!(sigma > 0.0)) raise(ErrorKind::ConfigError, "channel: sigma must be > 0");
  if (const auto* f = std::get_if<Fbm>(&kind)) {
    if (!(f->hurst > 0.0 && f->hurst < 1.0))
      raise(ErrorKind::ConfigError, "fbm: hurst must lie in (0, 1)");
  }
  auto g = grid();
  if (g.size() != static_cast<std::size_t>(n_frames))
    raise(ErrorKind::ConfigError, "channel: time_grid length != n_frames");
  double prev = 0.0;
  for (double t : g) {
    if (!(t > prev))
      raise(ErrorKind::ConfigError, "channel: time_grid must be strictly increasing and > 0");
    prev = t;
  }
}

GaussianPath GaussianPath::from_moments(std::vector<double> mean, linalg::SymMatrix cov,
                                        const linalg::JitterPolicy& policy) {
  if (mean.size() != static_cast<std::size_t>(cov.dim()))
    raise(ErrorKind::DimensionMismatch, "GaussianPath: mean length != cov dim");
  auto fact = linalg::cholesky(cov, policy);
  return GaussianPath{std::move(mean), std::move(cov), std::move(fact.L), fact.jitter};
}

GaussianPath GaussianPath::from_cholesky(std::vector<double> mean,
                                         const linalg::LowerTriangular& L) {
  const int n = L.dim();
  if (mean.size() != static_cast<std::size_t>(n))
    raise(ErrorKind::DimensionMismatch, "GaussianPath: mean length != chol dim");
  auto cov = linalg::SymMatrix::from_fn(n, [&L](int i, int j) {
    double acc = 0.0;
    for (int k = 0; k <= std::min(i, j); ++k) acc += L.at(i, k) * L.at(j, k);
    return acc;
  });
  return GaussianPath{std::move(mean), std::move(cov), L, 0.0};
}

GaussianPath fbm_cov(const GpChannelSpec& spec) {
  spec.validate();
  const auto* f = std::get_if<Fbm>(&spec.kind);
  if (f == nullptr) raise(ErrorKind::ConfigError, "fbm_cov: spec kind is not FBM");
  const auto grid = spec.grid();
  const double h2 = 2.0 * f->hurst;
  const double s2 = spec.sigma * spec.sigma;
  const double var_v = spec.var_v;
  auto cov = linalg::SymMatrix::from_fn(spec.n_frames, [&](int i, int j) {
    double s = grid[static_cast<std::size_t>(i)];
    double t = grid[static_cast<std::size_t>(j)];
    double r = 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::fabs(t - s), h2));
    return var_v + s2 * r;
  });
  return GaussianPath::from_moments(std::vector<double>(static_cast<std::size_t>(spec.n_frames), 0.0),
                                    std::move(cov));
}

GaussianPath bridge_cov(const GpChannelSpec& spec) {
  spec.validate();
  if (std::holds_alternative<Fbm>(spec.kind))
    raise(ErrorKind::ConfigError, "bridge_cov: spec kind is not a bridge");
  const auto grid = spec.grid();
  const double T = spec.bridge_horizon();
  for (double t : grid) {
    if (t <= 0.0 || t >= T)
      raise(ErrorKind::SingularAtEndpoint,
            "bridge: grid time " + std::to_string(t) + " touches the pinned endpoints [0, " +
                std::to_string(T) + "]");
  }
  const double s2 = spec.sigma * spec.sigma;
  const int n = spec.n_frames;

  std::vector<double> mean(static_cast<std::size_t>(n), 0.0);
  double a2 = 0.0;  // endpoint variance for the random-endpoint bridge
  if (const auto* fx = std::get_if<BridgeFixed>(&spec.kind)) {
    for (int i = 0; i < n; ++i) {
      double t = grid[static_cast<std::size_t>(i)];
      mean[static_cast<std::size_t>(i)] = fx->a * (1.0 - t / T) + fx->b * (t / T);
    }
  } else {
    a2 = std::get<BridgeRandom>(spec.kind).endpoint_std;
    a2 *= a2;
  }

  auto cov = linalg::SymMatrix::from_fn(n, [&](int i, int j) {
    double s = grid[static_cast<std::size_t>(i)];
    double t = grid[static_cast<std::size_t>(j)];
    double bb = s2 * (std::min(s, t) - s * t / T);
    double ends = a2 * ((1.0 - s / T) * (1.0 - t / T) + s * t / (T * T));
    return bb + ends;
  });
  return GaussianPath::from_moments(std::move(mean), std::move(cov));
}

GaussianPath channel_prior(const GpChannelSpec& spec) {
  if (std::holds_alternative<Fbm>(spec.kind)) return fbm_cov(spec);
  return bridge_cov(spec);
}

std::vector<double> sample_path(const GaussianPath& path, const std::vector<double>& noise) {
  if (noise.size() != path.mean.size())
    raise(ErrorKind::DimensionMismatch, "sample_path: noise length != path dim");
  auto y = linalg::lower_times_vec(path.chol, noise);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += path.mean[i];
  return y;
}

double kl_full_gaussian(const GaussianPath& posterior, const GaussianPath& prior) {
  const int n = prior.dim();
  if (posterior.dim() != n)
    raise(ErrorKind::DimensionMismatch, "kl_full_gaussian: dimension mismatch");

  // tr(S0^-1 S1) = ||L0^-1 L1||_F^2: solve L0 X = L1 column by column.
  double trace = 0.0;
  {
    linalg::Vec col(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = posterior.chol.at(i, j);
      auto x = linalg::solve_lower(prior.chol, col);
      for (double v : x) trace += v * v;
    }
  }

  linalg::Vec dmu(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    dmu[static_cast<std::size_t>(i)] =
        posterior.mean[static_cast<std::size_t>(i)] - prior.mean[static_cast<std::size_t>(i)];
  double quad = linalg::quad_form_inv(prior.chol, dmu);

  double log_det_prior = linalg::log_det_from_chol(prior.chol);
  double log_det_post = linalg::log_det_from_chol(posterior.chol);

  return 0.5 * (trace + quad - n + log_det_prior - log_det_post);
}

std::vector<GaussianPath> build_prior_bank(const std::vector<GpChannelSpec>& specs) {
  std::vector<GaussianPath> bank;
  bank.reserve(specs.size());
  if (specs.empty()) return bank;
  const int n = specs.front().n_frames;
  for (const auto& spec : specs) {
    if (spec.n_frames != n)
      raise(ErrorKind::MixedFrameCounts,
            "build_prior_bank: channels disagree on n_frames (" + std::to_string(spec.n_frames) +
                " vs " + std::to_string(n) + ")");
    bank.push_back(channel_prior(spec));
  }
  return bank;
}

}  // namespace mgp::gp
