#pragma once

#include <cstdint>

namespace cxlsim {

// Counter-based pseudo-random source. Every draw is a pure function of
// (seed, stream, ordinal), so sample streams are reproducible no matter
// how calls interleave across components.
struct CounterRng {
  static constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static uint64_t mix(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }

  static uint64_t draw_u64(uint64_t seed, uint64_t stream, uint64_t ordinal) {
    uint64_t x = seed + kGamma * (stream + 1);
    x = mix(x);
    x += kGamma * (ordinal + 1);
    return mix(x);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  static double draw_unit(uint64_t seed, uint64_t stream, uint64_t ordinal) {
    return static_cast<double>(draw_u64(seed, stream, ordinal) >> 11) *
           0x1.0p-53;
  }
};

}  // namespace cxlsim
