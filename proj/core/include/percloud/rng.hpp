#ifndef PERCLOUD_RNG_HPP
#define PERCLOUD_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace percloud {

// Seeded generator with hand-rolled distributions. std::mt19937_64 output is
// pinned by the standard, but std::normal_distribution is not, and most of
// this library's contracts are "same seed => byte-identical output".
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Modulo bias is negligible for n << 2^64 and irrelevant to the
    // determinism contract, which is all callers rely on.
    return engine_() % n;
  }

  // Standard normal via Box-Muller; one spare value cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace percloud

#endif
