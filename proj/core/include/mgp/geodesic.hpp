#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "mgp/autodiff.hpp"

namespace mgp::geo {

// Discrete geodesic interpolation through the decoder-induced data manifold.
//
// A path z_0, ..., z_T (endpoints frozen) is initialized as the linear
// interpolation and refined by gradient descent on the discrete path energy
//   E = 1/2 sum_i (1/dt) ||g(z_{i+1}) - g(z_i)||^2,
// whose gradient at an interior point is
//   grad_i E = -(1/dt) (grad g(z_i))^T [g(z_{i+1}) - 2 g(z_i) + g(z_{i-1})],
// evaluated with one vector-Jacobian product per point. dt defaults to 1,
// which makes the energy and the gradient formula mutually consistent.

struct GeodesicConfig {
  int num_interior = 4;
  int iters = 16;             // fixed-iteration mode sweep count
  double alpha = 0.05;        // step size
  double epsilon = 1e-6;      // energy-change threshold (convergence mode)
  bool until_convergence = false;
  int max_sweeps = 1000;      // safety cap in convergence mode
  double delta_t = 1.0;
};

// A map z -> g(z) built on a tape; forward and vjp both run through the
// recorded graph, so the refinement gradient is the autodiff one.
template <typename T>
class DifferentiableMap {
 public:
  virtual ~DifferentiableMap() = default;
  virtual int in_dim() const = 0;
  virtual int out_dim() const = 0;
  virtual ad::Var<T> build(ad::Tape<T>& tape, ad::Var<T> z) const = 0;

  std::vector<T> forward(std::span<const T> z) const {
    check_in(z.size());
    ad::Tape<T> tape;
    auto zv = tape.leaf({static_cast<int>(z.size())}, z, false);
    auto y = build(tape, zv);
    auto v = y.value();
    return std::vector<T>(v.begin(), v.end());
  }

  std::vector<T> vjp(std::span<const T> z, std::span<const T> cotangent) const {
    check_in(z.size());
    if (cotangent.size() != static_cast<std::size_t>(out_dim()))
      raise(ErrorKind::ShapeMismatch, "vjp: cotangent length != out_dim");
    ad::Tape<T> tape;
    auto zv = tape.leaf({static_cast<int>(z.size())}, z, true);
    auto y = build(tape, zv);
    tape.backward_seeded(y, cotangent);
    auto g = zv.grad();
    if (g.empty()) return std::vector<T>(z.size(), T(0));
    return std::vector<T>(g.begin(), g.end());
  }

 private:
  void check_in(std::size_t len) const {
    if (len != static_cast<std::size_t>(in_dim()))
      raise(ErrorKind::DimensionMismatch, "map: input length != in_dim");
  }
};

template <typename T>
struct GeodesicPath {
  std::vector<std::vector<T>> points;  // z_0 .. z_T; endpoints never move
  std::vector<double> energy_trace;    // initial energy, then one entry per sweep
  double delta_t = 1.0;
  int step_failures = 0;  // sweeps whose energy increased beyond tolerance
};

namespace detail {

template <typename T>
double energy_from_decodes(const std::vector<std::vector<T>>& g, double delta_t) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    double seg = 0.0;
    for (std::size_t j = 0; j < g[i].size(); ++j) {
      const double dv = static_cast<double>(g[i + 1][j]) - static_cast<double>(g[i][j]);
      seg += dv * dv;
    }
    acc += seg;
  }
  return 0.5 * acc / delta_t;
}

template <typename T>
std::vector<std::vector<T>> decode_points(const DifferentiableMap<T>& map,
                                          const std::vector<std::vector<T>>& points) {
  std::vector<std::vector<T>> g(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) g[i] = map.forward(points[i]);
  return g;
}

}  // namespace detail

template <typename T>
double path_energy(const GeodesicPath<T>& path, const DifferentiableMap<T>& map) {
  return detail::energy_from_decodes(detail::decode_points(map, path.points), path.delta_t);
}

template <typename T>
GeodesicPath<T> init_path(const DifferentiableMap<T>& map, std::span<const T> z0,
                          std::span<const T> zT, int num_interior, double delta_t = 1.0) {
  if (z0.size() != zT.size())
    raise(ErrorKind::DimensionMismatch, "init_path: endpoint dimensions differ");
  if (num_interior < 1) raise(ErrorKind::ConfigError, "init_path: num_interior must be >= 1");
  GeodesicPath<T> path;
  path.delta_t = delta_t;
  const int segments = num_interior + 1;
  path.points.resize(static_cast<std::size_t>(segments) + 1);
  for (int i = 0; i <= segments; ++i) {
    const double w = static_cast<double>(i) / segments;
    auto& p = path.points[static_cast<std::size_t>(i)];
    p.resize(z0.size());
    for (std::size_t j = 0; j < z0.size(); ++j)
      p[j] = static_cast<T>((1.0 - w) * static_cast<double>(z0[j]) +
                            w * static_cast<double>(zT[j]));
  }
  path.energy_trace.push_back(path_energy(path, map));
  return path;
}

// Gauss-Seidel sweeps in index order: each interior point is updated with the
// already-updated left neighbour, matching the sequential inner loop of the
// interpolation algorithm. Fixed-iteration mode runs exactly cfg.iters
// sweeps; convergence mode stops once the energy change drops below epsilon.
template <typename T>
GeodesicPath<T> refine(GeodesicPath<T> path, const DifferentiableMap<T>& map,
                       const GeodesicConfig& cfg) {
  const std::size_t count = path.points.size();
  if (count < 3) return path;  // no interior points
  path.delta_t = cfg.delta_t;

  auto decoded = detail::decode_points(map, path.points);
  if (path.energy_trace.empty())
    path.energy_trace.push_back(detail::energy_from_decodes(decoded, cfg.delta_t));
  double prev = path.energy_trace.back();

  const int sweeps = cfg.until_convergence ? cfg.max_sweeps : cfg.iters;
  std::vector<T> residual(static_cast<std::size_t>(map.out_dim()));
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t i = 1; i + 1 < count; ++i) {
      const auto& gm = decoded[i - 1];
      const auto& gc = decoded[i];
      const auto& gp = decoded[i + 1];
      for (std::size_t j = 0; j < residual.size(); ++j)
        residual[j] = gp[j] - T(2) * gc[j] + gm[j];
      auto pull = map.vjp(path.points[i], residual);
      const double step = cfg.alpha / cfg.delta_t;
      for (std::size_t j = 0; j < pull.size(); ++j)
        path.points[i][j] += static_cast<T>(step * static_cast<double>(pull[j]));
      decoded[i] = map.forward(path.points[i]);
    }
    const double energy = detail::energy_from_decodes(decoded, cfg.delta_t);
    if (!std::isfinite(energy))
      raise(ErrorKind::NonFiniteEnergy, "refine: path energy diverged (step size too large?)");
    if (energy > prev + 1e-9) path.step_failures += 1;
    path.energy_trace.push_back(energy);
    const double change = prev - energy;
    prev = energy;
    if (cfg.until_convergence && std::fabs(change) <= cfg.epsilon) break;
  }
  return path;
}

// First interior point of the refined path; the regression target that
// replaces the far endpoint in the prediction loss.
template <typename T>
std::vector<T> geodesic_target(const DifferentiableMap<T>& map, std::span<const T> z0,
                               std::span<const T> zT, const GeodesicConfig& cfg) {
  auto path = refine(init_path(map, z0, zT, cfg.num_interior, cfg.delta_t), map, cfg);
  return path.points[1];
}

}  // namespace mgp::geo
