#pragma once

#include <Eigen/Dense>

#include "elicit/special.hpp"

namespace elicit {

/// Prior on the index parameter lambda = 1/phi: lambda ~ Gamma(s/2, r/2), or
/// the known-dispersion limit s, r -> infinity with r/s = phi.
class PrecisionPrior {
 public:
  static PrecisionPrior gamma(double s, double r);
  static PrecisionPrior known(double phi);

  bool is_known() const { return known_; }
  /// Degrees of freedom s (kInfiniteDof when known).
  double shape() const;
  /// Rate r (infinite when known).
  double rate() const;
  /// r/s, the multiplier turning a generalised-t scale into a t scale.
  double ratio() const;
  /// Known phi, or 1/E[lambda] = r/s when the dispersion is elicited.
  double phi() const { return known_ ? phi_ : rate_ / shape_; }

  /// Posterior-style update (r + zeta, s + levels) used by conditional t's.
  /// Known dispersion is unaffected by conditioning.
  PrecisionPrior conditioned(double zeta, int levels) const;

  bool operator==(const PrecisionPrior&) const = default;

 private:
  PrecisionPrior(bool known, double s, double r, double phi)
      : known_(known), shape_(s), rate_(r), phi_(phi) {}
  bool known_;
  double shape_;
  double rate_;
  double phi_;
};

/// Univariate generalised t St_1(location, scale, r, s) = t_1(location,
/// (r/s) scale, s).
struct GenT1 {
  double location;
  double scale;
  PrecisionPrior prior;

  GenT1(double location, double scale, PrecisionPrior prior);

  double t_scale() const;  // sqrt((r/s) * scale)
  double logpdf(double x) const;
  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double q) const;
};

/// Multivariate generalised t St_n(location, scale, r, s).
struct GenTParams {
  Eigen::VectorXd location;
  Eigen::MatrixXd scale;
  PrecisionPrior prior;

  GenTParams(Eigen::VectorXd location, Eigen::MatrixXd scale,
             PrecisionPrior prior);

  Eigen::Index dim() const { return location.size(); }
  double logpdf(const Eigen::VectorXd& x) const;
};

}  // namespace elicit
