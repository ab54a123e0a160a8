#pragma once

#include <cstdint>

namespace minreg {

/// splitmix64. Tiny, fully portable, bit-reproducible across platforms and
/// standard-library versions, which std::uniform_real_distribution is not.
/// Every randomized check derives its stream from (master seed, task index)
/// so parallel schedules replay identically regardless of thread count.
struct splitmix64 {
  std::uint64_t state = 0;

  explicit splitmix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
};

/// Decorrelated per-task seed.
inline std::uint64_t task_seed(std::uint64_t master, std::uint64_t task) {
  splitmix64 mix(master ^ (task * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull));
  mix.next();
  return mix.next();
}

}  // namespace minreg
