#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace symdepth {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}
}  // namespace detail

/// Deterministic random source. All pipeline randomness flows from one root
/// seed through named substreams, so any stage can be re-run in isolation.
/// Distributions are generated with explicit Box-Muller / rejection maps
/// rather than std::*_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed)
      : seed_(seed), engine_(detail::splitmix64(seed)) {}

  Rng substream(std::string_view tag) const {
    return Rng(detail::splitmix64(seed_ ^ detail::fnv1a(tag)));
  }
  Rng substream(std::string_view tag, std::uint64_t index) const {
    return Rng(detail::splitmix64(detail::splitmix64(seed_ ^ detail::fnv1a(tag)) + index));
  }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n); bias is negligible for n << 2^64.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  double normal(double mean = 0.0, double sigma = 1.0) {
    if (!have_spare_) {
      double u1 = uniform01();
      while (u1 <= 0.0) u1 = uniform01();
      const double u2 = uniform01();
      const double r = std::sqrt(-2.0 * std::log(u1));
      spare_ = r * std::sin(2.0 * M_PI * u2);
      have_spare_ = true;
      return mean + sigma * r * std::cos(2.0 * M_PI * u2);
    }
    have_spare_ = false;
    return mean + sigma * spare_;
  }

  Eigen::Vector3d unit_vector() {
    // Marsaglia's method: uniform on the sphere.
    for (;;) {
      const double a = uniform(-1.0, 1.0);
      const double b = uniform(-1.0, 1.0);
      const double ss = a * a + b * b;
      if (ss >= 1.0 || ss == 0.0) continue;
      const double t = 2.0 * std::sqrt(1.0 - ss);
      return {a * t, b * t, 1.0 - 2.0 * ss};
    }
  }

 private:
  std::uint64_t seed_ = 0;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace symdepth
