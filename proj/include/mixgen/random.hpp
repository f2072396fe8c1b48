#pragma once

#include <cstdint>
#include <random>

namespace mixgen {

/// Source of raw 64-bit words. Every derived draw (unit doubles, bounded
/// integers, coin flips) is computed here from `next_u64` so that results do
/// not depend on the standard library's distribution implementations, and so
/// that tests can substitute scripted streams.
class RandomStream {
 public:
  virtual ~RandomStream() = default;
  virtual std::uint64_t next_u64() = 0;

  /// Uniform double in the open interval (0, 1).
  double next_unit();
  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t next_below(std::uint64_t bound);
  /// Lowest bit of the next word.
  bool next_bit() { return (next_u64() & 1u) != 0; }
};

/// Production stream: 64-bit Mersenne Twister.
class Mt64Stream final : public RandomStream {
 public:
  explicit Mt64Stream(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next_u64() override { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64_finalize(std::uint64_t x) noexcept;

/// Draws from Beta(alpha, beta). Shapes at or below one use Johnk's
/// rejection method evaluated in log space; larger shapes use a ratio of
/// Marsaglia-Tsang gamma variates. Throws InvalidBetaParams.
double sample_beta(double alpha, double beta, RandomStream& rng);

/// Marsaglia-Tsang gamma variate with unit scale; `shape` must be positive.
double sample_gamma(double shape, RandomStream& rng);

}  // namespace mixgen
