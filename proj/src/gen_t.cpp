#include "elicit/gen_t.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "elicit/error.hpp"

namespace elicit {

PrecisionPrior PrecisionPrior::gamma(double s, double r) {
  require(s > 0 && std::isfinite(s), "precision prior: s must be positive");
  require(r > 0 && std::isfinite(r), "precision prior: r must be positive");
  return PrecisionPrior(false, s, r, r / s);
}

PrecisionPrior PrecisionPrior::known(double phi) {
  require(phi > 0 && std::isfinite(phi),
          "precision prior: known dispersion must be positive");
  return PrecisionPrior(true, kInfiniteDof,
                        std::numeric_limits<double>::infinity(), phi);
}

double PrecisionPrior::shape() const { return known_ ? kInfiniteDof : shape_; }
double PrecisionPrior::rate() const {
  return known_ ? std::numeric_limits<double>::infinity() : rate_;
}
double PrecisionPrior::ratio() const { return known_ ? phi_ : rate_ / shape_; }

PrecisionPrior PrecisionPrior::conditioned(double zeta, int levels) const {
  require(zeta >= 0 && levels >= 0, "conditioned: invalid update");
  if (known_ || levels == 0) return *this;
  return gamma(shape_ + levels, rate_ + zeta);
}

GenT1::GenT1(double location_, double scale_, PrecisionPrior prior_)
    : location(location_), scale(scale_), prior(prior_) {
  require(scale > 0 && std::isfinite(scale),
          "generalised t: scale must be positive");
}

double GenT1::t_scale() const { return std::sqrt(prior.ratio() * scale); }

double GenT1::logpdf(double x) const {
  const double sd = t_scale();
  return student_t_logpdf((x - location) / sd, prior.shape()) - std::log(sd);
}

double GenT1::pdf(double x) const { return std::exp(logpdf(x)); }

double GenT1::cdf(double x) const {
  return student_t_cdf((x - location) / t_scale(), prior.shape());
}

double GenT1::quantile(double q) const {
  return location + t_scale() * student_t_quantile(q, prior.shape());
}

GenTParams::GenTParams(Eigen::VectorXd location_, Eigen::MatrixXd scale_,
                       PrecisionPrior prior_)
    : location(std::move(location_)), scale(std::move(scale_)), prior(prior_) {
  require(scale.rows() == location.size() && scale.cols() == location.size(),
          "generalised t: dimension mismatch");
  require(scale.isApprox(scale.transpose(), 1e-12),
          "generalised t: scale must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  require(llt.info() == Eigen::Success,
          "generalised t: scale must be positive definite");
}

double GenTParams::logpdf(const Eigen::VectorXd& x) const {
  const Eigen::LLT<Eigen::MatrixXd> llt(scale);
  const Eigen::MatrixXd& l = llt.matrixL();
  const double n = static_cast<double>(dim());
  const Eigen::VectorXd z = llt.matrixL().solve(x - location);
  const double quad = z.squaredNorm();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  if (prior.is_known()) {
    const double phi = prior.phi();
    return -0.5 * n * std::log(2.0 * std::numbers::pi * phi) - 0.5 * log_det -
           0.5 * quad / phi;
  }
  const double s = prior.shape();
  const double r = prior.rate();
  return std::lgamma(0.5 * (s + n)) - std::lgamma(0.5 * s) -
         0.5 * n * std::log(std::numbers::pi * r) - 0.5 * log_det -
         0.5 * (s + n) * std::log1p(quad / r);
}

}  // namespace elicit
