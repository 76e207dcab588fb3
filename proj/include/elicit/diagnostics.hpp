#pragma once

// Monte Carlo checks of the t approximation to the sample mean: Kolmogorov
// distance with a DKW band, and the log-ratio estimate of the divergence
// from the exact sample-mean law.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "elicit/dispersion.hpp"
#include "elicit/families.hpp"
#include "elicit/kernels.hpp"

namespace elicit {

struct SampleMeanOptions {
  /// Required for families not closed under convolution (simplex). The
  /// sample mean is then modelled as S(mu0, w lambda).
  bool acknowledge_no_convolution = false;
  kernels::Backend backend = kernels::Backend::omp;
};

/// N pairs (mean of w responses at mu0, lambda) with lambda ~ Gamma(s/2, r/2)
/// marginally. Pair i comes from stream i / kernels::kChunk of `seed`.
std::vector<kernels::MeanDraw> sample_mean_mc(const Family& family, double mu0,
                                              double w,
                                              const DispersionSpec& spec,
                                              std::size_t n,
                                              std::uint64_t seed,
                                              SampleMeanOptions options = {});

struct DiscrepancyReport {
  double kolmogorov = 0.0;
  double dkw_epsilon = 0.0;
  double band_alpha = 0.05;
  /// Absent when the family has no density (the report is then partial).
  std::optional<double> kl_estimate;
  std::optional<double> kl_stderr;
  std::size_t n_samples = 0;
  bool partial = false;
};

/// sqrt(-log(alpha/2) / (2N)).
double dkw_epsilon(std::size_t n, double alpha);

/// sup |F_N - F| for a continuous F; ties in the sample are grouped.
double kolmogorov_distance(std::vector<double> sample,
                           const std::function<double(double)>& cdf);

/// t approximation to the sample-mean cdf at (mu0, w).
std::function<double(double)> sample_mean_t_cdf(const Family& family,
                                                double mu0, double w,
                                                const DispersionSpec& spec);

DiscrepancyReport discrepancy_report(
    const std::vector<kernels::MeanDraw>& pairs, const Family& family,
    double mu0, double w, const DispersionSpec& spec, double band_alpha = 0.05,
    kernels::Backend backend = kernels::Backend::omp);

}  // namespace elicit
