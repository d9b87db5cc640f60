#include "illumkit/random.hpp"

namespace illumkit {

uint64_t SplitMix64::below(uint64_t n) {
  // Rejection sampling keeps the result unbiased.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x = next();
  while (x >= limit) x = next();
  return x % n;
}

uint64_t SplitMix64::stream_seed(uint64_t seed, uint64_t index) {
  return mix(mix(seed ^ 0x5851F42D4C957F2DULL) + mix(index + 0x9E3779B97F4A7C15ULL));
}

}  // namespace illumkit
