#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mgp/errors.hpp"

namespace mgp::ad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  std::int64_t step = 0;
  std::vector<T> m;
  std::vector<T> v;
};

// Standard Adam with bias correction. Moment math runs in double and is
// truncated back to T, so the update is deterministic for either scalar type.
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state,
               const AdamConfig& cfg) {
  if (params.size() != grads.size())
    raise(ErrorKind::ShapeMismatch, "adam_step: param/grad length mismatch");
  if (state.m.empty()) state.m.assign(params.size(), T(0));
  if (state.v.empty()) state.v.assign(params.size(), T(0));
  if (state.m.size() != params.size() || state.v.size() != params.size())
    raise(ErrorKind::ShapeMismatch, "adam_step: state length mismatch");

  state.step += 1;
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = static_cast<double>(grads[i]);
    const double m = b1 * static_cast<double>(state.m[i]) + (1.0 - b1) * g;
    const double v = b2 * static_cast<double>(state.v[i]) + (1.0 - b2) * g * g;
    state.m[i] = static_cast<T>(m);
    state.v[i] = static_cast<T>(v);
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    params[i] = static_cast<T>(static_cast<double>(params[i]) -
                               cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
  }
}

}  // namespace mgp::ad
