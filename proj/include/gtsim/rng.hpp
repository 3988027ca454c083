#pragma once

// Reproducible random sources. std::mt19937_64 is bit-exact across
// platforms by the standard; normal deviates come from an explicit
// Box-Muller transform because std::normal_distribution's output is
// implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace gtsim {

class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  // uniform in [0, 1), 53 bits
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // standard normal deviate; Box-Muller pairs are cached
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;          // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gtsim
