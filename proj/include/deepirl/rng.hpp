#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace deepirl {

/// Seeded generator with platform-independent sampling.
///
/// std::uniform_*_distribution is implementation-defined, so results are
/// derived from raw engine output to keep runs byte-identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Seed for an independent stream derived from a base seed.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return seed + stream;
}

}  // namespace deepirl
