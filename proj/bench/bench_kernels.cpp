// Times the serial reference kernels against the OpenMP kernels on the
// workloads the library runs: the simplex quadrature table, sample-mean pair
// draws and the log-ratio map.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "elicit/diagnostics.hpp"
#include "elicit/dispersion.hpp"
#include "elicit/kernels.hpp"
#include "elicit/simplex.hpp"

using namespace elicit;

namespace {

double seconds(const std::function<void()>& f, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void row(const std::string& name, double ref, double par) {
  std::printf("%-22s reference %9.3f ms   omp %9.3f ms   speedup %5.2fx\n", name.c_str(),
              1e3 * ref, 1e3 * par, ref / par);
}

}  // namespace

int main() {
  std::printf("omp threads: %d\n", kernels::omp::max_threads());

  std::vector<double> knots(4097);
  for (std::size_t i = 0; i < knots.size(); ++i) knots[i] = -20.0 + 40.0 * i / 4096.0;
  const auto logd = [](double t) {
    const double y = 1.0 / (1.0 + std::exp(-t));
    return studentised_simplex_logpdf(y, 0.01, 14.3, 118.0) + std::log(y * (1.0 - y));
  };
  row("panel_integrals",
      seconds([&] { kernels::reference::panel_integrals(logd, knots, 0.0); }, 5),
      seconds([&] { kernels::omp::panel_integrals(logd, knots, 0.0); }, 5));

  const Family gamma = Family::gamma();
  const DispersionSpec spec = dispersion_from_parameters(14.3, 118.0, 1.0, 10.0, gamma);
  const std::size_t n = 100000;
  const auto sampler = [&](RandomSource& rng) {
    const double lambda = rng.gamma(0.5 * spec.s(), 0.5 * spec.r());
    double sum = 0.0;
    for (int i = 0; i < 10; ++i) sum += sample_ed_one(gamma, 1.0, 1.0 / lambda, rng);
    return kernels::MeanDraw{sum / 10.0, lambda};
  };
  row("draw_pairs (gamma)",
      seconds([&] { kernels::reference::draw_pairs(sampler, n, 7); }, 3),
      seconds([&] { kernels::omp::draw_pairs(sampler, n, 7); }, 3));

  const auto pairs = sample_mean_mc(gamma, 1.0, 10.0, spec, n, 7);
  row("discrepancy_report",
      seconds([&] {
        discrepancy_report(pairs, gamma, 1.0, 10.0, spec, 0.05, kernels::Backend::reference);
      }, 3),
      seconds([&] {
        discrepancy_report(pairs, gamma, 1.0, 10.0, spec, 0.05, kernels::Backend::omp);
      }, 3));
  return 0;
}
