#include "elicit/dispersion.hpp"

#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "elicit/error.hpp"
#include "elicit/special.hpp"

namespace elicit {

namespace {

void check_quantiles(const SampleMeanQuantiles& q) {
  require(q.alpha1 > 0 && q.alpha1 < q.alpha2 && q.alpha2 < 1,
          "dispersion: need 0 < alpha1 < alpha2 < 1");
  require(q.d2 < q.d1 && q.d1 < q.mu0, "dispersion: need d2 < d1 < mu0");
}

double prior_v_phi(const PrecisionPrior& prior, double v, double w) {
  return prior.ratio() * v / w;
}

}  // namespace

DispersionSpec DispersionSpec::known(double phi) {
  DispersionSpec spec;
  spec.prior = PrecisionPrior::known(phi);
  return spec;
}

double dispersion_ratio_bound(double alpha1, double alpha2) {
  return normal_quantile(0.5 * (1.0 - alpha1)) /
         normal_quantile(0.5 * (1.0 - alpha2));
}

double dispersion_ratio(double s, double alpha1, double alpha2) {
  return student_t_quantile(0.5 * (1.0 - alpha1), s) /
         student_t_quantile(0.5 * (1.0 - alpha2), s);
}

QuantileFit fit_sample_mean_quantiles(const SampleMeanQuantiles& q) {
  check_quantiles(q);
  const double ratio = (q.d1 - q.mu0) / (q.d2 - q.mu0);
  const double bound = dispersion_ratio_bound(q.alpha1, q.alpha2);
  if (!(ratio < bound)) {
    throw Error(ErrorKind::inconsistent_with_t,
                "dispersion: interval ratio " + std::to_string(ratio) +
                    " is not below the normal bound " + std::to_string(bound),
                Interval{0.0, bound});
  }
  const auto excess = [&](double log_s) {
    return dispersion_ratio(std::exp(log_s), q.alpha1, q.alpha2) - ratio;
  };
  const double lo = std::log(kMinDof);
  const double hi = std::log(kMaxDof);
  const double f_lo = excess(lo);
  const double f_hi = excess(hi);
  double s;
  if (f_hi < 0) {
    s = kInfiniteDof;
  } else if (f_lo > 0) {
    fail(ErrorKind::solver,
         "dispersion: intervals imply fewer than 0.01 degrees of freedom");
  } else {
    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(
        excess, lo, hi, f_lo, f_hi,
        [](double a, double b) { return std::abs(b - a) < 1e-15; }, iters);
    s = std::exp(0.5 * (root.first + root.second));
  }
  const double z = student_t_quantile(0.5 * (1.0 - q.alpha1), s);
  const double scale = (q.d1 - q.mu0) / z;
  return {s, scale * scale};
}

DispersionSpec elicit_dispersion(const SampleMeanQuantiles& q, double w,
                                 const Family& family) {
  require(w > 0 && std::isfinite(w), "dispersion: w must be positive");
  require(family.domain().interior(q.mu0),
          "dispersion: mu0 must lie inside the mean domain of " +
              family.name());
  const QuantileFit fit = fit_sample_mean_quantiles(q);
  DispersionSpec spec;
  const double v = family.variance(q.mu0);
  if (is_infinite_dof(fit.s)) {
    spec.prior = PrecisionPrior::known(fit.v_phi * w / v);
  } else {
    spec.prior = PrecisionPrior::gamma(fit.s, fit.v_phi * w * fit.s / v);
  }
  spec.mu0 = q.mu0;
  spec.w = w;
  spec.v_phi = fit.v_phi;
  spec.quantiles = q;
  return spec;
}

DispersionSpec elicit_dispersion(double mu0, double w, double d1,
                                 double alpha1, double d2, double alpha2,
                                 const Family& family) {
  return elicit_dispersion(SampleMeanQuantiles{mu0, d1, alpha1, d2, alpha2},
                           w, family);
}

DispersionSpec dispersion_from_parameters(double s, double r, double mu0,
                                          double w, const Family& family) {
  require(w > 0 && std::isfinite(w), "dispersion: w must be positive");
  DispersionSpec spec;
  spec.prior = PrecisionPrior::gamma(s, r);
  spec.mu0 = mu0;
  spec.w = w;
  spec.v_phi = prior_v_phi(spec.prior, family.variance(mu0), w);
  return spec;
}

double sample_mean_quantile(double q, double mu0, double v_phi, double s) {
  require(v_phi > 0, "sample mean quantile: scale must be positive");
  return mu0 + std::sqrt(v_phi) * student_t_quantile(q, s);
}

std::pair<double, double> forward_dispersion_quantiles(
    double s, double r, double mu0, double w, const Family& family,
    double alpha1, double alpha2) {
  const double v_phi = r * family.variance(mu0) / (w * s);
  return {sample_mean_quantile(0.5 * (1.0 - alpha1), mu0, v_phi, s),
          sample_mean_quantile(0.5 * (1.0 - alpha2), mu0, v_phi, s)};
}

double berry_esseen_bound(double kurtosis, double w) {
  require(kurtosis >= 1, "Berry-Esseen: kurtosis must be at least 1");
  require(w > 0, "Berry-Esseen: w must be positive");
  return kBerryEsseenK * std::sqrt(kurtosis) / std::sqrt(w);
}

double power_rate_upper_bound(double mu0, double w, double s, double v_phi) {
  require(mu0 > 0, "power parameter: mu0 must be positive");
  require(w > 0 && s > 0 && v_phi > 0,
          "power parameter: w, s and v_phi must be positive");
  return v_phi * w * s / (2.0 * mu0 * mu0);
}

PowerParam elicit_power_parameter(double c0, double mu0, double w, double s,
                                  double v_phi) {
  require(c0 > 0 && c0 < 1, "power parameter: c0 must lie in (0, 1)");
  require(!is_infinite_dof(s),
          "power parameter: needs an elicited (finite) s",
          ErrorKind::unsupported);
  const double upper = power_rate_upper_bound(mu0, w, s, v_phi);
  const double r_p = unit_gamma_median_solve(c0, s);
  // Relative slack at the quantile inversion accuracy, so a c0 on the
  // boundary is not accepted through inversion error.
  if (!(r_p < upper * (1.0 - 1e-10))) {
    // r_p = med / (-log c0) is increasing in c0.
    const double med = r_p * -std::log(c0);
    throw Error(ErrorKind::infeasible_power,
                "power parameter: median " + std::to_string(c0) +
                    " implies p <= 1",
                Interval{0.0, std::exp(-med / upper)});
  }
  const double p = 2.0 - r_p / upper;
  const double r = 2.0 * r_p * std::pow(mu0, 2.0 - p) / (2.0 - p);
  return {c0, r_p, p, r, upper};
}

double power_rate_known_p(double p, double mu0, double w, double s,
                          double v_phi) {
  require(p > 1 && p < 2, "power parameter: p must lie in (1, 2)");
  require(mu0 > 0 && w > 0 && s > 0 && v_phi > 0,
          "power parameter: inputs must be positive");
  return v_phi * w * s / std::pow(mu0, p);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> lognormal_transform(
    const Eigen::VectorXd& delta_b, const Eigen::MatrixXd& sigma_b,
    double base) {
  require(base > 0 && base != 1 && std::isfinite(base),
          "lognormal transform: base must be positive and not 1");
  require(sigma_b.rows() == delta_b.size() && sigma_b.cols() == delta_b.size(),
          "lognormal transform: dimension mismatch");
  require(sigma_b.isApprox(sigma_b.transpose(), 1e-12),
          "lognormal transform: scale must be symmetric");
  require(Eigen::LLT<Eigen::MatrixXd>(sigma_b).info() == Eigen::Success,
          "lognormal transform: scale must be positive definite");
  const double log_b = std::log(base);
  return {delta_b * log_b, sigma_b * (log_b * log_b)};
}

}  // namespace elicit
