#pragma once

// Monte Carlo and quadrature kernels. Each kernel has a serial reference
// implementation and an OpenMP implementation. Work is cut into fixed-size
// chunks and chunk c draws from RandomSource(seed, c), so both backends return
// identical results at any thread count.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "elicit/random.hpp"

namespace elicit::kernels {

enum class Backend { reference, omp };

inline constexpr std::size_t kChunk = 256;

struct MeanDraw {
  double mean;
  double lambda;
};

using PairSampler = std::function<MeanDraw(RandomSource&)>;
using ScalarSampler = std::function<double(RandomSource&)>;
using Term = std::function<double(std::size_t)>;
using LogDensity = std::function<double(double)>;

namespace reference {
std::vector<double> panel_integrals(const LogDensity& log_density,
                                    const std::vector<double>& knots,
                                    double shift);
std::vector<MeanDraw> draw_pairs(const PairSampler& sampler, std::size_t n,
                                 std::uint64_t seed);
std::vector<double> draw_scalars(const ScalarSampler& sampler, std::size_t n,
                                 std::uint64_t seed);
std::vector<double> map_terms(const Term& term, std::size_t n);
}  // namespace reference

namespace omp {
std::vector<double> panel_integrals(const LogDensity& log_density,
                                    const std::vector<double>& knots,
                                    double shift);
std::vector<MeanDraw> draw_pairs(const PairSampler& sampler, std::size_t n,
                                 std::uint64_t seed);
std::vector<double> draw_scalars(const ScalarSampler& sampler, std::size_t n,
                                 std::uint64_t seed);
std::vector<double> map_terms(const Term& term, std::size_t n);
int max_threads();
}  // namespace omp

/// Dispatching entry points. panel_integrals returns the integral of
/// exp(log_density(t) - shift) over each panel [t_i, t_{i+1}].
std::vector<double> panel_integrals(const LogDensity& log_density,
                                    const std::vector<double>& knots,
                                    double shift,
                                    Backend backend = Backend::omp);
std::vector<MeanDraw> draw_pairs(const PairSampler& sampler, std::size_t n,
                                 std::uint64_t seed,
                                 Backend backend = Backend::omp);
std::vector<double> draw_scalars(const ScalarSampler& sampler, std::size_t n,
                                 std::uint64_t seed,
                                 Backend backend = Backend::omp);
std::vector<double> map_terms(const Term& term, std::size_t n,
                              Backend backend = Backend::omp);

/// Gauss-Legendre integral of f over [a, b] with 8 nodes.
double gauss_legendre8(const std::function<double(double)>& f, double a,
                       double b);

}  // namespace elicit::kernels
