#include <algorithm>
#include <array>
#include <cmath>

#include "elicit/kernels.hpp"

namespace elicit::kernels {

namespace {
// Nodes and weights on [-1, 1].
constexpr std::array<double, 4> kNodes = {
    0.1834346424956498049394761, 0.5255324099163289858177390,
    0.7966664774136267395915539, 0.9602898564975362316835609};
constexpr std::array<double, 4> kWeights = {
    0.3626837833783619829651504, 0.3137066458778872873379622,
    0.2223810344533744705443560, 0.1012285362903762591525314};
}  // namespace

double gauss_legendre8(const std::function<double(double)>& f, double a,
                       double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t j = 0; j < kNodes.size(); ++j) {
    sum += kWeights[j] * (f(mid - half * kNodes[j]) + f(mid + half * kNodes[j]));
  }
  return half * sum;
}

namespace reference {

std::vector<double> panel_integrals(const LogDensity& log_density,
                                    const std::vector<double>& knots,
                                    double shift) {
  std::vector<double> out(knots.size() < 2 ? 0 : knots.size() - 1);
  const auto f = [&](double t) { return std::exp(log_density(t) - shift); };
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = gauss_legendre8(f, knots[i], knots[i + 1]);
  }
  return out;
}

std::vector<MeanDraw> draw_pairs(const PairSampler& sampler, std::size_t n,
                                 std::uint64_t seed) {
  std::vector<MeanDraw> out(n);
  for (std::size_t c = 0; c * kChunk < n; ++c) {
    RandomSource rng(seed, static_cast<std::uint32_t>(c));
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) out[i] = sampler(rng);
  }
  return out;
}

std::vector<double> draw_scalars(const ScalarSampler& sampler, std::size_t n,
                                 std::uint64_t seed) {
  std::vector<double> out(n);
  for (std::size_t c = 0; c * kChunk < n; ++c) {
    RandomSource rng(seed, static_cast<std::uint32_t>(c));
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) out[i] = sampler(rng);
  }
  return out;
}

std::vector<double> map_terms(const Term& term, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = term(i);
  return out;
}

}  // namespace reference

std::vector<double> panel_integrals(const LogDensity& log_density,
                                    const std::vector<double>& knots,
                                    double shift, Backend backend) {
  return backend == Backend::omp
             ? omp::panel_integrals(log_density, knots, shift)
             : reference::panel_integrals(log_density, knots, shift);
}

std::vector<MeanDraw> draw_pairs(const PairSampler& sampler, std::size_t n,
                                 std::uint64_t seed, Backend backend) {
  return backend == Backend::omp ? omp::draw_pairs(sampler, n, seed)
                                 : reference::draw_pairs(sampler, n, seed);
}

std::vector<double> draw_scalars(const ScalarSampler& sampler, std::size_t n,
                                 std::uint64_t seed, Backend backend) {
  return backend == Backend::omp ? omp::draw_scalars(sampler, n, seed)
                                 : reference::draw_scalars(sampler, n, seed);
}

std::vector<double> map_terms(const Term& term, std::size_t n,
                              Backend backend) {
  return backend == Backend::omp ? omp::map_terms(term, n)
                                 : reference::map_terms(term, n);
}

}  // namespace elicit::kernels
