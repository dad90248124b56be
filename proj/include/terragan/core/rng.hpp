#pragma once

#include <cstddef>
#include <cstdint>

namespace terragan {

/// Counter-based pseudo-random stream.
///
/// The i-th draw is a pure function of (seed, i): a SplitMix64 finalizer
/// applied to `key + i * golden_gamma`. Gaussian samples use Box-Muller on
/// two consecutive draws, so identical seeds and call sequences reproduce
/// bit-identical streams on any platform with IEEE doubles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform in [0, 1).
  double uniform01() noexcept;
  double uniform(double lo, double hi) noexcept;
  double normal(double mean = 0.0, double stddev = 1.0) noexcept;

  /// Uniform integer in [0, n); n must be positive.
  std::size_t below(std::size_t n) noexcept;

  /// Independent stream derived from this generator's seed and `stream`.
  /// Does not advance this generator.
  [[nodiscard]] Rng fork(std::uint64_t stream) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace terragan
