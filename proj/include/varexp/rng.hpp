#pragma once

#include <cstdint>

namespace varexp {

// SplitMix64: 64-bit state, constants from Steele/Lea/Flood's splittable
// generators. Chosen for portability: identical streams on every platform,
// so seeded scenarios reproduce bit-for-bit.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed = 0) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 random mantissa bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Symmetric uniform in [-s, s).
  double sym(double s) { return uniform(-s, s); }

 private:
  uint64_t state_;
};

}  // namespace varexp
