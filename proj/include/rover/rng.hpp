#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random numbers: every draw is a pure function of (seed, index),
// so parallel evaluation order cannot change any value and replays are exact.

namespace rover::rng {

inline constexpr uint64_t golden = 0x9E3779B97F4A7C15ULL;

/// splitmix64 finalizer (bijective 64-bit mixer).
inline constexpr uint64_t mix(uint64_t z) {
  z += golden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Key for an independent substream of `seed`.
inline constexpr uint64_t derive(uint64_t seed, uint64_t stream) { return mix(seed ^ mix(stream)); }

/// Uniform double in the open interval (0, 1).
inline constexpr double u01(uint64_t bits) { return ((bits >> 11) + 0.5) * 0x1.0p-53; }

/// Standard normal draw for (seed, tick), Box-Muller on two derived uniforms.
inline double gaussian(uint64_t seed, uint64_t tick) {
  const uint64_t h = derive(seed, tick);
  const double u1 = u01(mix(h ^ 0x243F6A8885A308D3ULL));
  const double u2 = u01(mix(h ^ 0x13198A2E03707344ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Uniform on [lo, hi] for (seed, index).
inline double uniform(uint64_t seed, uint64_t index, double lo, double hi) {
  return lo + (hi - lo) * u01(derive(seed, index));
}

/// Uniform on [-half_width, +half_width] for (seed, index).
inline double uniform_sym(uint64_t seed, uint64_t index, double half_width) {
  return uniform(seed, index, -half_width, half_width);
}

}  // namespace rover::rng
