#pragma once

// SplitMix64: a 64-bit counter-based generator with a fixed, published
// output sequence on every platform. Seed 1234567 produces
// 6457827717110365317, 3203168211198807973, 9817491932198370423, ...

#include <cstdint>

namespace illumkit {

class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed = 0) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be > 0.
  uint64_t below(uint64_t n);

  /// Seed of an independent substream for (seed, index).
  static uint64_t stream_seed(uint64_t seed, uint64_t index);

  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  uint64_t state_;
};

}  // namespace illumkit
