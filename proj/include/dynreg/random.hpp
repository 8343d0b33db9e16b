#ifndef DYNREG_RANDOM_HPP
#define DYNREG_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

#include "dynreg/point.hpp"

namespace dynreg {

/// Counter-based SplitMix64 stream.
///
/// The i-th draw (1-based) of a stream with seed s is mix64(s + i * 0x9E3779B97F4A7C15),
/// where mix64 is the SplitMix64 finalizer. Uniforms take the top 53 bits; normals use
/// the basic Box-Muller transform on two consecutive uniforms (cosine branch only).
/// Nothing here depends on <random>, so streams are identical across standard libraries.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed) : seed_(seed) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Independent child stream keyed by `tag`.
  SplitMix64 derive(std::uint64_t tag) const { return SplitMix64(mix64(seed_ ^ mix64(tag + kGolden))); }

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(seed_ + counter_ * kGolden);
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Point normal_point(Index n) {
    Point p(n);
    for (Index i = 0; i < n; ++i) p[i] = normal();
    return p;
  }

  Point uniform_point(Index n, double lo, double hi) {
    Point p(n);
    for (Index i = 0; i < n; ++i) p[i] = uniform(lo, hi);
    return p;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace dynreg

#endif  // DYNREG_RANDOM_HPP
