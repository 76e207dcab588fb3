#pragma once

// Standard simplex dispersion model S(mu, lambda) on (0, 1), its gamma
// mixture over lambda (the Studentised simplex) and an inverse-CDF sampler.

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "elicit/random.hpp"

namespace elicit {

/// d(y, mu) = (y - mu)^2 / (y (1 - y) mu^2 (1 - mu)^2).
double simplex_unit_deviance(double y, double mu);
double simplex_logpdf(double y, double mu, double lambda);

/// f(y | mu, s, r) = integral of S(y | mu, lambda) Gamma(lambda | s/2, r/2).
double studentised_simplex_logpdf(double y, double mu, double s, double r);

/// mu^3 (1 - mu)^3 / lambda.
double simplex_variance_approx(double mu, double lambda);
/// Exact variance via the incomplete-gamma identity Gamma(1/2, z) =
/// sqrt(pi) erfc(sqrt(z)), evaluated with a scaled erfc to avoid overflow.
double simplex_variance_exact(double mu, double lambda);

/// exp(x^2) erfc(x) for x >= 0.
double erfcx(double x);

/// Tabulated CDF on (0, 1) built by Gauss-Legendre panel integration of a
/// density in logit coordinates, interpolated by a monotone cubic Hermite
/// spline. Immutable after construction; shareable across threads.
class InverseCdfTable {
 public:
  static constexpr std::size_t kDefaultKnots = 4096;

  /// `log_density` is evaluated on (0, 1). `center` and `spread` locate the
  /// bulk of the mass (spread is a rough standard deviation on the y scale).
  InverseCdfTable(const std::function<double(double)>& log_density,
                  double center, double spread,
                  std::size_t knots = kDefaultKnots);

  double cdf(double y) const;
  double quantile(double u) const;
  /// Normalising constant found by quadrature, before rescaling to 1.
  double raw_mass() const { return raw_mass_; }
  std::size_t knots() const { return t_.size(); }

 private:
  double hermite(std::size_t i, double t) const;
  double hermite_slope(std::size_t i, double t) const;

  std::vector<double> t_;      // logit knots, increasing
  std::vector<double> cdf_;    // CDF at knots
  std::vector<double> slope_;  // limited dCDF/dt at knots
  double raw_mass_ = 0.0;
};

/// Inverse-CDF sampler for the Studentised simplex f(. | mu, s, r).
class StudentisedSimplexSampler {
 public:
  StudentisedSimplexSampler(double mu, double s, double r,
                            std::size_t knots = InverseCdfTable::kDefaultKnots);

  double mu() const { return mu_; }
  double s() const { return s_; }
  double r() const { return r_; }
  double cdf(double y) const { return table_->cdf(y); }
  double sample(RandomSource& rng) const;
  std::vector<double> sample(std::size_t n, RandomSource& rng) const;
  const InverseCdfTable& table() const { return *table_; }

 private:
  double mu_, s_, r_;
  std::shared_ptr<const InverseCdfTable> table_;
};

/// Inverse-CDF sampler for S(mu, lambda).
class SimplexSampler {
 public:
  SimplexSampler(double mu, double lambda,
                 std::size_t knots = InverseCdfTable::kDefaultKnots);
  double sample(RandomSource& rng) const;
  const InverseCdfTable& table() const { return *table_; }

 private:
  std::shared_ptr<const InverseCdfTable> table_;
};

std::vector<double> studentised_simplex_sample(double mu, double s, double r,
                                               std::size_t n,
                                               RandomSource& rng);

}  // namespace elicit
