// Counter-based pseudo-random generator. Every consumer derives its own
// stream from (seed, stream index), so results do not depend on evaluation
// order or thread count and are bit-identical across runs.
#pragma once

#include <cmath>
#include <cstdint>

#include "ssc/gaussian.hpp"

namespace ssc {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix64(seed)) {}

  static Rng from_stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix64(seed) ^ mix64(stream ^ 0xA5A5A5A55A5A5A5AULL));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on (0,1].
  double uniform() { return ((next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  // Standard normal via Box-Muller; second value cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ssc
