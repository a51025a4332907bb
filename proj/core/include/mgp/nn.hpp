#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "mgp/adam.hpp"
#include "mgp/autodiff.hpp"
#include "mgp/rng.hpp"

namespace mgp::nn {

// Named persistent parameter buffers plus their optimizer state. Parameters
// are re-materialized as tape leaves each training step; iteration order is
// creation order everywhere, which keeps runs reproducible and gives the
// checkpoint manifest a stable layout.

template <typename T>
struct Param {
  std::string name;
  ad::Shape shape;
  std::vector<T> value;
  ad::AdamState<T> opt;
};

inline double he_uniform_limit(std::int64_t fan_in) {
  return std::sqrt(6.0 / static_cast<double>(fan_in));
}

template <typename T>
class ParamStore {
 public:
  int add_zeros(const std::string& name, ad::Shape shape) {
    return emplace(name, std::move(shape), 0.0, nullptr);
  }

  int add_uniform(const std::string& name, ad::Shape shape, double limit, rng::Engine& rng) {
    return emplace(name, std::move(shape), limit, &rng);
  }

  Param<T>& operator[](int i) { return params_[static_cast<std::size_t>(i)]; }
  const Param<T>& operator[](int i) const { return params_[static_cast<std::size_t>(i)]; }

  Param<T>& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) raise(ErrorKind::Internal, "ParamStore: unknown param " + name);
    return params_[static_cast<std::size_t>(it->second)];
  }

  int index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) raise(ErrorKind::Internal, "ParamStore: unknown param " + name);
    return it->second;
  }

  std::size_t size() const { return params_.size(); }

  std::int64_t scalar_count() const {
    std::int64_t n = 0;
    for (const auto& p : params_) n += ad::numel(p.shape);
    return n;
  }

  // Leaves in store order.
  std::vector<ad::Var<T>> leaves(ad::Tape<T>& tape, bool requires_grad = true) const {
    std::vector<ad::Var<T>> vars;
    vars.reserve(params_.size());
    for (const auto& p : params_)
      vars.push_back(tape.leaf(p.shape, std::span<const T>(p.value), requires_grad));
    return vars;
  }

  // Adam on every parameter whose leaf received a gradient.
  void apply_adam(const std::vector<ad::Var<T>>& vars, const ad::AdamConfig& cfg) {
    if (vars.size() != params_.size())
      raise(ErrorKind::ShapeMismatch, "apply_adam: leaf count mismatch");
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto g = vars[i].grad();
      if (g.empty()) continue;  // parameter unused by this loss
      ad::adam_step<T>(std::span<T>(params_[i].value), g, params_[i].opt, cfg);
    }
  }

 private:
  int emplace(const std::string& name, ad::Shape shape, double limit, rng::Engine* rng) {
    if (index_.count(name)) raise(ErrorKind::Internal, "ParamStore: duplicate param " + name);
    Param<T> p;
    p.name = name;
    p.value.resize(static_cast<std::size_t>(ad::numel(shape)));
    p.shape = std::move(shape);
    if (rng != nullptr) {
      for (auto& v : p.value) v = static_cast<T>(rng->uniform(-limit, limit));
    }
    params_.push_back(std::move(p));
    int id = static_cast<int>(params_.size()) - 1;
    index_[name] = id;
    return id;
  }

  std::vector<Param<T>> params_;
  std::unordered_map<std::string, int> index_;
};

// 3-tensor helper: affine layer indices inside a store.
struct LinearIds {
  int w = -1;
  int b = -1;
};

template <typename T>
LinearIds add_linear(ParamStore<T>& store, const std::string& name, int in, int out,
                     rng::Engine& rng) {
  LinearIds ids;
  ids.w = store.add_uniform(name + ".w", {in, out}, he_uniform_limit(in), rng);
  ids.b = store.add_zeros(name + ".b", {out});
  return ids;
}

template <typename T>
ad::Var<T> linear(ad::Tape<T>& tape, const std::vector<ad::Var<T>>& vars, const LinearIds& ids,
                  ad::Var<T> x) {
  return tape.affine(x, vars[static_cast<std::size_t>(ids.w)],
                     vars[static_cast<std::size_t>(ids.b)]);
}

}  // namespace mgp::nn
