#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace har {

// Number of grey levels in every raster handled by this library.
inline constexpr int kGreyLevels = 256;

// Grey-level quantization rounds half up everywhere (77.5 -> 78).
inline int round_half_up(double x) {
  return static_cast<int>(std::floor(x + 0.5));
}

inline std::uint8_t clamp_u8(int v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

// Thin wrapper over mt19937 that maps raw engine output to ranges itself,
// so streams are reproducible across standard library implementations
// (std::uniform_int_distribution is not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed)
      : engine_(static_cast<std::uint32_t>(seed ^ (seed >> 32))) {}

  std::uint32_t next_u32() { return engine_(); }

  // Uniform integer in [lo, hi], both inclusive.
  int uniform_int(int lo, int hi) {
    const std::uint32_t span = static_cast<std::uint32_t>(hi - lo) + 1u;
    return lo + static_cast<int>(next_u32() % span);
  }

  // Uniform real in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (next_u32() * (1.0 / 4294967296.0));
  }

 private:
  std::mt19937 engine_;
};

}  // namespace har
