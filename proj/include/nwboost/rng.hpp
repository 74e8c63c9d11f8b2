#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nwboost {

//! SplitMix64 finalizer; used to derive independent child seeds.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

//! Seed for replicate k, independent of the order replicates are generated in.
inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t k) {
  return seed ^ splitmix64(k);
}

//! Deterministic RNG with explicit uniform and normal transforms. The
//! transforms are spelled out (rather than std::*_distribution) so that a
//! given seed produces the same stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  //! Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  //! N(0, sd^2) via Box-Muller; draws are consumed in pairs.
  double normal(double sd = 1.0) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_ * sd;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle) * sd;
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nwboost
