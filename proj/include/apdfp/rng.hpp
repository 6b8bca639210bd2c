#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace apdfp {

// Seeded helpers built on std::mt19937_64 (the engine output sequence is
// fixed by the standard). The mapping to doubles is done by hand because
// the std distributions are implementation-defined; traces and generated
// data must be bit-stable across toolchains.

/// Uniform double in [0, 1) from one 64-bit draw.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform double in [-1, 1).
inline double uniform_pm1(std::mt19937_64& gen) {
  return 2.0 * uniform01(gen) - 1.0;
}

/// Standard normal draws via Box-Muller, one spare cached.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01(gen_);
    double u2 = uniform01(gen_);
    while (u1 <= 0.0) u1 = uniform01(gen_);  // guard log(0)
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace apdfp
