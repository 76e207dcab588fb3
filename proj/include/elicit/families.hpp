#pragma once

// Exponential dispersion and dispersion-model families: variance functions,
// mean domains and samplers for ED(mu, phi) responses.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "elicit/link.hpp"
#include "elicit/random.hpp"

namespace elicit {

enum class FamilyKind {
  normal,
  poisson,
  gamma,
  inverse_gaussian,
  binomial_proportion,
  compound_poisson,
  simplex,
  lognormal_target,
};

class Family {
 public:
  static Family normal() { return Family(FamilyKind::normal); }
  static Family poisson() { return Family(FamilyKind::poisson); }
  static Family gamma() { return Family(FamilyKind::gamma); }
  static Family inverse_gaussian() { return Family(FamilyKind::inverse_gaussian); }
  static Family binomial_proportion() {
    return Family(FamilyKind::binomial_proportion);
  }
  /// Tweedie member with 1 < p < 2. Without p the power is elicited later.
  static Family compound_poisson(std::optional<double> p = std::nullopt);
  static Family simplex() { return Family(FamilyKind::simplex); }
  /// Normal model for log_B of a lognormal target, B > 0 and B != 1.
  static Family lognormal_target(double base);

  /// Accepts the names produced by name(); "compound-poisson" takes an
  /// optional power.
  static Family from_name(std::string_view name,
                          std::optional<double> parameter = std::nullopt);
  /// One member of each kind (compound Poisson at p = 1.5, lognormal at e).
  static std::vector<Family> registry();

  FamilyKind kind() const { return kind_; }
  std::string name() const;
  /// Power p of v(mu) = mu^p for Tweedie members.
  std::optional<double> power() const;
  double base() const { return base_; }
  MeanDomain domain() const;
  bool supports_convolution() const { return kind_ != FamilyKind::simplex; }
  /// True when the response law has a density usable in log-ratio estimates.
  bool has_density() const;
  bool is_discrete() const;

  double variance(double mu) const;
  /// log density of ED(mu, phi) at x. Requires has_density().
  double logpdf(double x, double mu, double phi) const;

  bool operator==(const Family&) const = default;

 private:
  explicit Family(FamilyKind kind) : kind_(kind) {}
  FamilyKind kind_;
  std::optional<double> power_;
  double base_ = 0.0;
};

double variance_function(const Family& family, double mu);

/// n draws from ED(mu, phi), mean mu and variance phi v(mu).
std::vector<double> sample_ed(const Family& family, double mu, double phi,
                              std::size_t n, RandomSource& rng);

/// One draw from ED(mu, phi) for families with a direct sampler (every
/// member except simplex and lognormal_target).
double sample_ed_one(const Family& family, double mu, double phi,
                     RandomSource& rng);

}  // namespace elicit
