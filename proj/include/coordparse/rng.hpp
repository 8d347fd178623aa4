#pragma once

#include <cstdint>
#include <random>

namespace coordparse {

// Deterministic random stream. Wraps mt19937_64 but draws uniforms through
// fixed arithmetic so that output does not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Derive an independent stream for (seed, index), e.g. one per utterance.
  static Rng derive(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer over the pair
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1).
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(uniform() * n); }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller, one value per call (the pair's second half is discarded so
    // the stream position stays predictable)
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace coordparse
