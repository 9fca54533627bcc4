#pragma once

#include <cmath>
#include <cstdint>

namespace ttsa {

// Counter-based random numbers. Every output word is a hash of
// (seed, stream, step, draw counter), so the draws at step n can be
// reproduced without replaying the trajectory, and two threads can sample
// disjoint seeds with no shared state. The mixer is the SplitMix64
// finalizer; the constants are part of the reproducibility contract and
// must not change between releases.

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

class StepRng {
 public:
  StepRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
    std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ (stream * 0xd1342543de82ef95ULL));
    base_ = mix64(h ^ (step * 0x2545f4914f6cdd1dULL));
  }

  std::uint64_t next_u64() {
    ctr_ += 0x9e3779b97f4a7c15ULL;
    return mix64(base_ ^ ctr_);
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second value is cached.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t base_ = 0;
  std::uint64_t ctr_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ttsa
