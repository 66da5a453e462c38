#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "egdeg/types.hpp"

namespace egdeg {

/// SplitMix64 finalizer; used as a counter-based generator so that the
/// k-th draw for a given seed never depends on scheduling.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Sequential stream over the counter generator. Distributions are
/// implemented here rather than with <random> so results are identical
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next_u64() { return mix64(key_ + counter_++); }
  double uniform() { return unit_from_bits(next_u64()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vec normal_vec(int dim) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal();
    return v;
  }

  /// Uniform direction on the unit sphere S^{dim-1}.
  Vec direction(int dim) {
    for (;;) {
      Vec v = normal_vec(dim);
      const double n = v.norm();
      if (n > 1e-12) return v / n;
    }
  }

  /// Uniform point of the open ball of radius r in dimension dim.
  Vec in_ball(int dim, double r) {
    if (dim == 0) return Vec(0);
    return direction(dim) * (r * std::pow(uniform(), 1.0 / dim));
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Radical-inverse Halton point in [0,1)^dim.
inline Vec halton(std::uint64_t index, int dim) {
  static constexpr int kPrimes[kMaxDim] = {2, 3, 5, 7, 11, 13, 17, 19};
  Vec p(dim);
  for (int j = 0; j < dim; ++j) {
    const int base = kPrimes[j];
    double f = 1.0, r = 0.0;
    std::uint64_t i = index + 1;
    while (i > 0) {
      f /= base;
      r += f * static_cast<double>(i % base);
      i /= base;
    }
    p[j] = r;
  }
  return p;
}

}  // namespace egdeg
