#pragma once

#include <cstdint>
#include <random>

namespace vgne {

/// Deterministic stream: std::mt19937_64 (fully specified by the C++
/// standard) with uniforms built from the top 53 bits, so instances are
/// reproducible across standard libraries and languages.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vgne
