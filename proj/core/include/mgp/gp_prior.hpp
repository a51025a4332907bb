#pragma once

#include <variant>
#include <vector>

#include "mgp/linalg.hpp"
#include "mgp/rng.hpp"

namespace mgp::gp {

// One latent channel = one Gaussian-process path over the frame grid.
//
// Frames sit at t = 1, 2, ..., n. Bridge channels use horizon T = n + 1 so
// every frame is strictly interior to (0, T); pinning the bridge exactly at
// the last frame would zero its marginal variance and make the KL undefined.

struct Fbm {
  double hurst = 0.5;  // in (0, 1)
};

struct BridgeFixed {
  double a = -2.0;  // pinned start value
  double b = 2.0;   // pinned end value
};

struct BridgeRandom {
  double endpoint_std = 1.0;  // std of the N(0, s^2) endpoints A, B
};

using ChannelKind = std::variant<Fbm, BridgeFixed, BridgeRandom>;

struct GpChannelSpec {
  ChannelKind kind;
  double sigma = 0.25;  // process scale
  int n_frames = 8;
  std::vector<double> time_grid;  // empty => 1..n_frames
  double var_v = 1.0;             // fBM initial-value variance (V standard normal)
  double horizon = 0.0;           // bridges: T; 0 => n_frames + 1

  std::vector<double> grid() const;   // resolved time grid
  double bridge_horizon() const;      // resolved T
  void validate() const;
};

// Mean vector and covariance of one channel, with the covariance's Cholesky
// factor cached. Used for both the prior (analytic) and the posterior
// (encoder output, built via from_cholesky).
struct GaussianPath {
  std::vector<double> mean;
  linalg::SymMatrix cov;
  linalg::LowerTriangular chol;
  double jitter = 0.0;

  int dim() const { return cov.dim(); }

  static GaussianPath from_moments(std::vector<double> mean, linalg::SymMatrix cov,
                                   const linalg::JitterPolicy& policy = linalg::JitterPolicy::adaptive());
  static GaussianPath from_cholesky(std::vector<double> mean, const linalg::LowerTriangular& L);
};

// fBM channel: mean 0, cov[s][t] = var_v + sigma^2 * (s^2H + t^2H - |t-s|^2H)/2.
GaussianPath fbm_cov(const GpChannelSpec& spec);

// Bridge channel on horizon T:
//   fixed endpoints:  mean(t) = a(1 - t/T) + b t/T,  cov = sigma^2 (min(s,t) - st/T)
//   random endpoints: mean 0, cov += endpoint_std^2 [(1-s/T)(1-t/T) + st/T^2]
// Throws SingularAtEndpoint if any grid point touches 0 or T.
GaussianPath bridge_cov(const GpChannelSpec& spec);

// Dispatch on spec.kind.
GaussianPath channel_prior(const GpChannelSpec& spec);

// mean + chol * noise.
std::vector<double> sample_path(const GaussianPath& path, const std::vector<double>& noise);

// KL(posterior || prior) for full-covariance Gaussians:
//   1/2 [ tr(S0^-1 S1) + <m1-m0, S0^-1 (m1-m0)> - k + log det S0 - log det S1 ].
// The log-det ratio is oriented so KL(q, q) == 0.
double kl_full_gaussian(const GaussianPath& posterior, const GaussianPath& prior);

// Independent per-channel priors; channels never share covariance.
std::vector<GaussianPath> build_prior_bank(const std::vector<GpChannelSpec>& specs);

}  // namespace mgp::gp
