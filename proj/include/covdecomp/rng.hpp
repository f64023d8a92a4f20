#pragma once

#include <cstdint>
#include <initializer_list>

namespace covdecomp {

/// SplitMix64 used as a counter-based generator: the k-th output is
/// mix64(seed + k * 0x9E3779B97F4A7C15). Output is identical on every
/// platform, unlike the std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Stream for a (seed, tag...) tuple, e.g. (seed, n, replicate).
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

  static std::uint64_t mix64(std::uint64_t z);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform integer in [0, bound), bound > 0. Rejection sampling, unbiased.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Standard normal by the Box-Muller transform; the second variate of
  /// each pair is cached.
  double normal();

  bool coin() { return (next_u64() >> 63) != 0; }

 private:
  std::uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace covdecomp
