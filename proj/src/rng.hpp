#pragma once

#include <cstdint>
#include <limits>

namespace genheck::rng {

/// SplitMix64 output finalizer (a 64-bit avalanche mixer).
constexpr std::uint64_t finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// Seed for sub-stream `k` of `master`: finalize(master + golden * (k + 1)).
constexpr std::uint64_t mix(std::uint64_t master, std::uint64_t k) {
  return finalize(master + kGolden * (k + 1));
}

/// SplitMix64 sequence. Normals come from the inverse normal CDF applied to
/// 53-bit uniforms in (0, 1), so any implementation with an accurate quantile
/// function reproduces the same draws.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += kGolden;
    return finalize(state_);
  }

  /// (floor(bits / 2^11) + 0.5) / 2^53, never 0 or 1.
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal();

 private:
  std::uint64_t state_;
};

}  // namespace genheck::rng
