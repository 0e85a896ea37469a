#pragma once

#include <cstdint>
#include <initializer_list>

namespace cdecomp {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based generator "cdecomp-ctr64": the k-th 64-bit draw is
/// splitmix64(key + (k + 1) * 0x9E3779B97F4A7C15), with key = splitmix64(seed).
/// Output is a pure function of (seed, k); std distributions are not used so
/// streams are identical across standard libraries.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal by Box-Muller; consumes two draws per pair of outputs.
  double normal();
  /// Uniform integer in [0, bound), by rejection.
  std::uint64_t below(std::uint64_t bound);
  /// +1 or -1 with equal probability.
  double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Seed-splitting rule for parallel tasks: folds each path element into the
/// seed with seed <- splitmix64(seed ^ splitmix64(element + 1)).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

}  // namespace cdecomp
