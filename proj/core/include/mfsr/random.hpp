#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace mfsr {

/// std::mt19937_64 with hand-rolled uniform and normal transforms.
///
/// The engine's output sequence is fixed by the standard; the library
/// distributions are not, so they are avoided to keep streams identical
/// across toolchains.
class Rng {
public:
  static constexpr const char* kAlgorithm = "mt19937_64 + 53-bit uniform + Box-Muller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  /// +1 or -1 with equal probability.
  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

  std::uint64_t next() { return engine_(); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mfsr
