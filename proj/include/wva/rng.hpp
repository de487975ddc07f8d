#pragma once

// Counter-based random streams: every (seed, counter) pair names an
// independent substream, so trial i draws the same numbers no matter which
// worker runs it or in what order.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace wva {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for an independent child stream (e.g. one per campaign point).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0xD1B54A32D192ED03ULL + 1));
}

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t counter)
      : key_(splitmix64(splitmix64(seed) ^ (counter * 0xD1B54A32D192ED03ULL))) {}

  constexpr std::uint64_t next_u64() { return splitmix64(key_ + (++draws_) * kGolden); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_positive() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one of the pair).
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_positive()));
    return r * std::cos(2.0 * std::numbers::pi * uniform());
  }

 private:
  std::uint64_t key_;
  std::uint64_t draws_ = 0;
};

}  // namespace wva
