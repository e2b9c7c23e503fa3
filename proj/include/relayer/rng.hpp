// Counter-based SplitMix64.
//
// The i-th output for a seed is mix64(seed + (i + 1) * 0x9E3779B97F4A7C15),
// using the finalizer constants of Steele, Lea and Flood's SplitMix64. Any
// output can be recomputed from (seed, i) alone, so streams are split by
// counter ranges instead of by generator state.

#pragma once

#include <cstdint>

namespace relayer {

class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

  constexpr std::uint64_t seed() const { return seed_; }

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    std::uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
};

}  // namespace relayer
