#include <omp.h>

#include <algorithm>
#include <cmath>

#include "elicit/kernels.hpp"

namespace elicit::kernels::omp {

int max_threads() { return omp_get_max_threads(); }

std::vector<double> panel_integrals(const LogDensity& log_density,
                                    const std::vector<double>& knots,
                                    double shift) {
  const std::ptrdiff_t panels =
      knots.size() < 2 ? 0 : static_cast<std::ptrdiff_t>(knots.size()) - 1;
  std::vector<double> out(static_cast<std::size_t>(panels));
  const auto f = [&](double t) { return std::exp(log_density(t) - shift); };
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < panels; ++i) {
    out[i] = gauss_legendre8(f, knots[i], knots[i + 1]);
  }
  return out;
}

namespace {
template <typename T, typename Sampler>
std::vector<T> draw_chunked(const Sampler& sampler, std::size_t n,
                            std::uint64_t seed) {
  std::vector<T> out(n);
  const auto chunks = static_cast<std::ptrdiff_t>((n + kChunk - 1) / kChunk);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    RandomSource rng(seed, static_cast<std::uint32_t>(c));
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    for (std::size_t i = begin; i < end; ++i) out[i] = sampler(rng);
  }
  return out;
}
}  // namespace

std::vector<MeanDraw> draw_pairs(const PairSampler& sampler, std::size_t n,
                                 std::uint64_t seed) {
  return draw_chunked<MeanDraw>(sampler, n, seed);
}

std::vector<double> draw_scalars(const ScalarSampler& sampler, std::size_t n,
                                 std::uint64_t seed) {
  return draw_chunked<double>(sampler, n, seed);
}

std::vector<double> map_terms(const Term& term, std::size_t n) {
  std::vector<double> out(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) out[i] = term(i);
  return out;
}

}  // namespace elicit::kernels::omp
