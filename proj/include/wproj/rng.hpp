#pragma once

#include <cstdint>

namespace wproj {

/// Deterministic 64-bit generator (splitmix64). State advances by the golden
/// constant 0x9E3779B97F4A7C15 and the output is scrambled with the published
/// finalizer constants 0xBF58476D1CE4E5B9 / 0x94D049BB133111EB, so streams
/// reproduce bit-for-bit on every platform. Substreams for trials are derived
/// with mix() rather than by jumping a shared stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double next_double(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // 53-bit path keeps the draw sequence identical to next_double().
    return static_cast<std::uint64_t>(next_double() * static_cast<double>(n));
  }

 private:
  std::uint64_t state_;
};

/// One splitmix64 scramble of (seed + golden * (key + 1)); used to split
/// per-trial substreams so that trial k of run (seed, n, m) is reproducible
/// in isolation.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
  std::uint64_t s = seed + 0x9E3779B97F4A7C15ULL * (key + 1);
  std::uint64_t z = s + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

template <typename... Keys>
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key, Keys... rest) {
  return mix_seed(mix_seed(seed, key), rest...);
}

}  // namespace wproj
