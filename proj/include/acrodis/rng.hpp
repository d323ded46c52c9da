#pragma once

#include <cstdint>
#include <string_view>

namespace acrodis {

/// Deterministic 64-bit generator (splitmix64). Every piece of randomness in
/// the library flows through this type so that seeded runs are
/// bit-reproducible across platforms; std::uniform_real_distribution has
/// implementation-defined output and is avoided on purpose.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

/// splitmix64 finalizer, usable as a one-shot hash of a 64-bit value.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Combine a base seed with a stream index into an independent seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(base ^ (stream + 0x9e3779b97f4a7c15ULL));
}

/// FNV-1a 64-bit string hash. Stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace acrodis
