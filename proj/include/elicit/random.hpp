#pragma once

#include <cstdint>
#include <random>

namespace elicit {

/// Seedable random stream. Identical (seed, stream) pairs produce identical
/// draw sequences on every platform: the engine is std::mt19937_64 (fully
/// specified by the standard) and every variate transform is implemented here
/// rather than taken from <random> distributions, whose algorithms are
/// implementation-defined.
///
/// Single-owner mutable state; give each thread its own stream.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint32_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint32_t stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double gamma(double shape, double rate);
  double exponential(double rate);
  std::uint64_t poisson(double mean);
  std::uint64_t binomial(std::uint64_t trials, double p);
  /// Inverse Gaussian with mean mu and shape lambda (variance mu^3 / lambda).
  double inverse_gaussian(double mu, double shape);

 private:
  std::uint64_t seed_;
  std::uint32_t stream_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace elicit
