#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mgp::rng {

// Stateless 64-bit mixer, used to derive independent stream seeds from a
// (seed, stream) pair so that parallel generation never depends on ordering.
struct SplitMix64 {
  std::uint64_t state;

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

// Deterministic random source. std::mt19937_64 is fully specified by the
// standard, and all variate transforms here are explicit formulas, so the
// same seed yields the same stream on every platform. Distribution classes
// from <random> are never used (their output is implementation-defined).
class Engine {
 public:
  explicit Engine(std::uint64_t seed) : gen_(seed) {}

  static Engine derive(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 mix{seed ^ (0xa02bdbf7bb3c0a7ull * (stream + 1))};
    return Engine(mix.next());
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 bits of mantissa.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller. Two uniforms per draw, no cached spare,
  // so the engine state alone captures the generator state.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Uniform integer in [lo, hi], rejection sampled to avoid modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::string save_state() const;
  void load_state(const std::string& s);

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 gen_;
};

}  // namespace mgp::rng
