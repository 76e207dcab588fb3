#include "elicit/families.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "elicit/error.hpp"
#include "elicit/simplex.hpp"

namespace elicit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Family Family::compound_poisson(std::optional<double> p) {
  if (p) {
    require(*p > 1 && *p < 2, "compound Poisson: power must lie in (1, 2)");
  }
  Family f(FamilyKind::compound_poisson);
  f.power_ = p;
  return f;
}

Family Family::lognormal_target(double base) {
  require(base > 0 && base != 1 && std::isfinite(base),
          "lognormal target: base must be positive and not 1");
  Family f(FamilyKind::lognormal_target);
  f.base_ = base;
  return f;
}

Family Family::from_name(std::string_view name,
                         std::optional<double> parameter) {
  if (name == "normal") return normal();
  if (name == "poisson") return poisson();
  if (name == "gamma") return gamma();
  if (name == "inverse-gaussian") return inverse_gaussian();
  if (name == "binomial-proportion") return binomial_proportion();
  if (name == "compound-poisson") return compound_poisson(parameter);
  if (name == "simplex") return simplex();
  if (name == "lognormal-target") {
    return lognormal_target(parameter.value_or(std::numbers::e));
  }
  fail(ErrorKind::domain, "unknown family '" + std::string(name) + "'");
}

std::vector<Family> Family::registry() {
  return {normal(),
          poisson(),
          gamma(),
          inverse_gaussian(),
          binomial_proportion(),
          compound_poisson(1.5),
          simplex(),
          lognormal_target(std::numbers::e)};
}

std::string Family::name() const {
  switch (kind_) {
    case FamilyKind::normal: return "normal";
    case FamilyKind::poisson: return "poisson";
    case FamilyKind::gamma: return "gamma";
    case FamilyKind::inverse_gaussian: return "inverse-gaussian";
    case FamilyKind::binomial_proportion: return "binomial-proportion";
    case FamilyKind::compound_poisson: return "compound-poisson";
    case FamilyKind::simplex: return "simplex";
    case FamilyKind::lognormal_target: return "lognormal-target";
  }
  return "";
}

std::optional<double> Family::power() const {
  switch (kind_) {
    case FamilyKind::normal: return 0.0;
    case FamilyKind::poisson: return 1.0;
    case FamilyKind::gamma: return 2.0;
    case FamilyKind::inverse_gaussian: return 3.0;
    case FamilyKind::compound_poisson: return power_;
    default: return std::nullopt;
  }
}

MeanDomain Family::domain() const {
  switch (kind_) {
    case FamilyKind::normal:
    case FamilyKind::lognormal_target: return {-kInf, kInf};
    case FamilyKind::binomial_proportion:
    case FamilyKind::simplex: return {0.0, 1.0};
    default: return {0.0, kInf};
  }
}

bool Family::has_density() const {
  switch (kind_) {
    case FamilyKind::normal:
    case FamilyKind::gamma:
    case FamilyKind::inverse_gaussian:
    case FamilyKind::simplex:
    case FamilyKind::lognormal_target: return true;
    default: return false;
  }
}

bool Family::is_discrete() const {
  return kind_ == FamilyKind::poisson ||
         kind_ == FamilyKind::binomial_proportion ||
         kind_ == FamilyKind::compound_poisson;
}

double Family::variance(double mu) const {
  require(domain().interior(mu),
          name() + ": mean " + std::to_string(mu) + " outside the mean domain");
  switch (kind_) {
    case FamilyKind::normal:
    case FamilyKind::lognormal_target: return 1.0;
    case FamilyKind::poisson: return mu;
    case FamilyKind::gamma: return mu * mu;
    case FamilyKind::inverse_gaussian: return mu * mu * mu;
    case FamilyKind::binomial_proportion: return mu * (1.0 - mu);
    case FamilyKind::compound_poisson:
      require(power_.has_value(), "compound Poisson: power not yet known",
              ErrorKind::unsupported);
      return std::pow(mu, *power_);
    case FamilyKind::simplex: {
      const double v = mu * (1.0 - mu);
      return v * v * v;
    }
  }
  return 1.0;
}

double Family::logpdf(double x, double mu, double phi) const {
  require(phi > 0, name() + ": dispersion must be positive");
  switch (kind_) {
    case FamilyKind::normal:
    case FamilyKind::lognormal_target: {
      const double z = x - mu;
      return -0.5 * std::log(2.0 * std::numbers::pi * phi) - 0.5 * z * z / phi;
    }
    case FamilyKind::gamma: {
      if (!(x > 0)) return -kInf;
      const double shape = 1.0 / phi;
      const double rate = 1.0 / (phi * mu);
      return shape * std::log(rate) - std::lgamma(shape) +
             (shape - 1.0) * std::log(x) - rate * x;
    }
    case FamilyKind::inverse_gaussian: {
      if (!(x > 0)) return -kInf;
      const double shape = 1.0 / phi;
      const double z = x - mu;
      return 0.5 * (std::log(shape / (2.0 * std::numbers::pi)) - 3.0 * std::log(x)) -
             shape * z * z / (2.0 * mu * mu * x);
    }
    case FamilyKind::simplex: return simplex_logpdf(x, mu, 1.0 / phi);
    default:
      fail(ErrorKind::unsupported, name() + ": no density available");
  }
}

double variance_function(const Family& family, double mu) {
  return family.variance(mu);
}

double sample_ed_one(const Family& family, double mu, double phi,
                     RandomSource& rng) {
  require(phi > 0 && std::isfinite(phi), "sample_ed: phi must be positive");
  require(family.domain().interior(mu), "sample_ed: mean outside domain");
  switch (family.kind()) {
    case FamilyKind::normal: return mu + std::sqrt(phi) * rng.normal();
    case FamilyKind::poisson:
      return phi * static_cast<double>(rng.poisson(mu / phi));
    case FamilyKind::gamma: return rng.gamma(1.0 / phi, 1.0 / (phi * mu));
    case FamilyKind::inverse_gaussian:
      return rng.inverse_gaussian(mu, 1.0 / phi);
    case FamilyKind::binomial_proportion: {
      const double k = std::round(1.0 / phi);
      require(k >= 1 && std::abs(k * phi - 1.0) < 1e-9,
              "binomial proportion: phi must be 1/k for an integer k",
              ErrorKind::unsupported);
      const auto trials = static_cast<std::uint64_t>(k);
      return static_cast<double>(rng.binomial(trials, mu)) / k;
    }
    case FamilyKind::compound_poisson: {
      const auto p = family.power();
      require(p.has_value(), "compound Poisson: power not yet known",
              ErrorKind::unsupported);
      const double lambda_n = std::pow(mu, 2.0 - *p) / (phi * (2.0 - *p));
      const std::uint64_t count = rng.poisson(lambda_n);
      if (count == 0) return 0.0;
      const double shape = (2.0 - *p) / (*p - 1.0);
      const double scale = phi * (*p - 1.0) * std::pow(mu, *p - 1.0);
      return rng.gamma(shape * static_cast<double>(count), 1.0 / scale);
    }
    case FamilyKind::simplex:
    case FamilyKind::lognormal_target: break;
  }
  fail(ErrorKind::unsupported,
       "sample_ed: no single-draw sampler for " + family.name());
}

std::vector<double> sample_ed(const Family& family, double mu, double phi,
                              std::size_t n, RandomSource& rng) {
  std::vector<double> out(n);
  if (family.kind() == FamilyKind::simplex) {
    require(phi > 0 && std::isfinite(phi), "sample_ed: phi must be positive");
    const SimplexSampler sampler(mu, 1.0 / phi);
    for (double& y : out) y = sampler.sample(rng);
    return out;
  }
  if (family.kind() == FamilyKind::lognormal_target) {
    fail(ErrorKind::unsupported,
         "sample_ed: the lognormal target is a transform, sample its normal "
         "scale instead");
  }
  for (double& y : out) y = sample_ed_one(family, mu, phi, rng);
  return out;
}

}  // namespace elicit
