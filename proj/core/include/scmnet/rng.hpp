#pragma once

#include <cstdint>
#include <cmath>

namespace scmnet {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Counter-based splittable random stream.
///
/// Output n of a stream with key K is mix64(K + (n+1)*GOLDEN), i.e. the
/// SplitMix64 sequence seeded at K. Child streams are derived by remixing the
/// key with the child index, so a stream keyed by (seed, trajectory, node)
/// yields the same draws no matter which thread consumes it or in which order
/// sibling streams are consumed.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : key_(mix64(seed ^ kDomain)) {}

  /// Independent child stream for substream index `idx`.
  SplitRng split(std::uint64_t idx) const {
    return SplitRng(from_key_tag{}, mix64(key_ + kGolden * (idx + 1)));
  }

  std::uint64_t next_u64() { return mix64(key_ + kGolden * (++counter_)); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Unbiased uniform integer in [0, bound), bound >= 1.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t reject = (~bound + 1) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= reject) return r % bound;
    }
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static SplitRng from_key(std::uint64_t key, std::uint64_t counter = 0) {
    SplitRng r{from_key_tag{}, key};
    r.counter_ = counter;
    return r;
  }

 private:
  struct from_key_tag {};
  SplitRng(from_key_tag, std::uint64_t key) : key_(key) {}

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kDomain = 0x243F6A8885A308D3ull;
  static constexpr double kPi = 3.14159265358979323846;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace scmnet
