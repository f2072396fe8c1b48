#include "mixgen/random.hpp"

#include <algorithm>
#include <cmath>

#include "mixgen/error.hpp"

namespace mixgen {

double RandomStream::next_unit() {
  // 52 bits plus a half step: the largest value 1 - 2^-53 is still below 1.
  return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

std::uint64_t RandomStream::next_below(std::uint64_t bound) {
  // Rejection on the low end keeps x % bound exactly uniform.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= threshold) return x % bound;
  }
}

std::uint64_t splitmix64_finalize(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

double normal(RandomStream& rng) {
  // Box-Muller; one variate per call keeps stream consumption simple.
  const double u1 = rng.next_unit();
  const double u2 = rng.next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double johnk_beta(double alpha, double beta, RandomStream& rng) {
  for (;;) {
    const double log_x = std::log(rng.next_unit()) / alpha;
    const double log_y = std::log(rng.next_unit()) / beta;
    const double log_max = std::max(log_x, log_y);
    const double log_sum =
        log_max + std::log(std::exp(log_x - log_max) + std::exp(log_y - log_max));
    if (log_sum <= 0.0) {
      return std::clamp(std::exp(log_x - log_sum), 0.0, 1.0);
    }
  }
}

}  // namespace

double sample_gamma(double shape, RandomStream& rng) {
  if (shape < 1.0) {
    // Boost to shape + 1 and rescale by U^(1/shape).
    const double u = rng.next_unit();
    return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_unit();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

double sample_beta(double alpha, double beta, RandomStream& rng) {
  if (!(alpha > 0.0 && beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw Error(ErrorCode::InvalidBetaParams, "Beta shape parameters must be positive");
  }
  if (alpha <= 1.0 && beta <= 1.0) return johnk_beta(alpha, beta, rng);
  const double x = sample_gamma(alpha, rng);
  const double y = sample_gamma(beta, rng);
  return std::clamp(x / (x + y), 0.0, 1.0);
}

}  // namespace mixgen
