#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace kess {

/// Seeded random stream with substream derivation.
///
/// A SplitMix64 scramble of (master_seed, stream) seeds a std::mt19937_64,
/// so replication r can run on Rng(master, r) independently of every other
/// replication and in any order. uniform01 and normal are produced from raw
/// 64-bit draws (53-bit mantissa conversion, polar Box-Muller), so the
/// emitted sequence is fixed by the seed alone and does not depend on the
/// standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(scramble(seed)) {}

  Rng(std::uint64_t master_seed, std::uint64_t stream)
      : engine_(scramble(scramble(master_seed) ^ (stream + 0x9E3779B97F4A7C15ULL))) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform draw in [0, 1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal draw (polar Box-Muller; caches the second deviate).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  /// Uniform integer in {0, ..., bound - 1} via rejection (unbiased).
  std::uint64_t uniform_below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

 private:
  static std::uint64_t scramble(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace kess
