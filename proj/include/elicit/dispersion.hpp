#pragma once

// Elicitation of the dispersion prior lambda ~ Gamma(s/2, r/2) from two
// central intervals for a sample mean, plus the compound-Poisson power
// parameter and the lognormal base change.

#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "elicit/families.hpp"
#include "elicit/gen_t.hpp"

namespace elicit {

inline constexpr double kDefaultAlpha1 = 1.0 / 3.0;
inline constexpr double kDefaultAlpha2 = 0.90;
inline constexpr double kBerryEsseenK = 0.469;
/// Solver bracket for s; fits above the upper end collapse to known dispersion.
inline constexpr double kMinDof = 1e-2;
inline constexpr double kMaxDof = 1e6;

/// Lower interval endpoints d2 < d1 < mu0 for central intervals of
/// probability alpha1 < alpha2.
struct SampleMeanQuantiles {
  double mu0;
  double d1;
  double alpha1;
  double d2;
  double alpha2;
};

struct DispersionSpec {
  PrecisionPrior prior = PrecisionPrior::known(1.0);
  /// Sample-mean setting the prior was elicited under.
  std::optional<double> mu0;
  std::optional<double> w;
  /// t scale of the sample mean, r v(mu0) / (w s), or phi v(mu0) / w.
  std::optional<double> v_phi;
  std::optional<SampleMeanQuantiles> quantiles;

  static DispersionSpec known(double phi);
  bool is_known() const { return prior.is_known(); }
  double s() const { return prior.shape(); }
  double r() const { return prior.rate(); }
};

/// Family-free part of the fit: degrees of freedom and t scale of the sample
/// mean. `s` is kInfiniteDof when the intervals are effectively normal.
struct QuantileFit {
  double s;
  double v_phi;
};

/// Phi^-1((1 - alpha1)/2) / Phi^-1((1 - alpha2)/2); the ratio
/// (d1 - mu0)/(d2 - mu0) must lie strictly below it.
double dispersion_ratio_bound(double alpha1, double alpha2);
/// T^-1((1 - alpha1)/2 | s) / T^-1((1 - alpha2)/2 | s).
double dispersion_ratio(double s, double alpha1, double alpha2);

QuantileFit fit_sample_mean_quantiles(const SampleMeanQuantiles& q);

DispersionSpec elicit_dispersion(const SampleMeanQuantiles& q, double w,
                                 const Family& family);
DispersionSpec elicit_dispersion(double mu0, double w, double d1,
                                 double alpha1, double d2, double alpha2,
                                 const Family& family);

/// Prior given directly as (s, r) for a sample-mean setting (mu0, w).
DispersionSpec dispersion_from_parameters(double s, double r, double mu0,
                                          double w, const Family& family);

/// mu0 + sqrt(r v(mu0) / (w s)) T^-1(q | s).
double sample_mean_quantile(double q, double mu0, double v_phi, double s);

/// Lower endpoints (d1, d2) of the central intervals implied by (s, r).
std::pair<double, double> forward_dispersion_quantiles(
    double s, double r, double mu0, double w, const Family& family,
    double alpha1 = kDefaultAlpha1, double alpha2 = kDefaultAlpha2);

/// K sqrt(kurtosis) / sqrt(w) with K = 0.469.
double berry_esseen_bound(double kurtosis, double w);

struct PowerParam {
  double c0;
  double r_p;
  double p;
  double r;
  /// v_phi w s / (2 mu0^2); r_p must lie below it.
  double r_p_upper;
};

/// Upper bound on r_p for a given sample-mean fit.
double power_rate_upper_bound(double mu0, double w, double s, double v_phi);

/// Median c0 of the zero-response probability q0 -> (r_p, p, r). Fails with
/// ErrorKind::infeasible_power and the admissible c0 interval when r_p is at
/// or above the bound.
PowerParam elicit_power_parameter(double c0, double mu0, double w, double s,
                                  double v_phi);
/// r = v_phi w s / mu0^p when p is fixed in advance.
double power_rate_known_p(double p, double mu0, double w, double s,
                          double v_phi);

/// Converts a normal prior for log_B(target) coefficients to natural logs:
/// delta = delta_B ln B, sigma = sigma_B (ln B)^2.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> lognormal_transform(
    const Eigen::VectorXd& delta_b, const Eigen::MatrixXd& sigma_b,
    double base);

}  // namespace elicit
