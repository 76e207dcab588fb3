#include "elicit/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "elicit/error.hpp"
#include "elicit/kernels.hpp"
#include "elicit/special.hpp"

namespace elicit {

namespace {

constexpr double kLogitRange = 40.0;

double sigmoid(double t) {
  return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

double logit(double y) { return std::log(y) - std::log1p(-y); }

// log(y (1 - y)) for y = sigmoid(t), stable in both tails.
double log_jacobian(double t) {
  const double a = std::abs(t);
  return -a - 2.0 * std::log1p(std::exp(-a));
}

void check_mean(double mu) {
  require(mu > 0 && mu < 1, "simplex: mean must lie in (0, 1)");
}

}  // namespace

double simplex_unit_deviance(double y, double mu) {
  const double diff = y - mu;
  const double v = mu * (1.0 - mu);
  return diff * diff / (y * (1.0 - y) * v * v);
}

double simplex_logpdf(double y, double mu, double lambda) {
  check_mean(mu);
  require(lambda > 0, "simplex: lambda must be positive");
  if (!(y > 0 && y < 1)) return -std::numeric_limits<double>::infinity();
  const double yy = y * (1.0 - y);
  return 0.5 * std::log(lambda / (2.0 * std::numbers::pi)) - 1.5 * std::log(yy) -
         0.5 * lambda * simplex_unit_deviance(y, mu);
}

double studentised_simplex_logpdf(double y, double mu, double s, double r) {
  check_mean(mu);
  require(s > 0 && r > 0, "studentised simplex: s and r must be positive");
  if (!(y > 0 && y < 1)) return -std::numeric_limits<double>::infinity();
  const double log_beta =
      std::lgamma(0.5 * s) + std::lgamma(0.5) - std::lgamma(0.5 * (s + 1.0));
  return -0.5 * std::log(r) - log_beta - 1.5 * std::log(y * (1.0 - y)) -
         0.5 * (s + 1.0) * std::log1p(simplex_unit_deviance(y, mu) / r);
}

double erfcx(double x) {
  require(x >= 0, "erfcx: argument must be nonnegative");
  if (x < 20.0) return std::exp(x * x) * std::erfc(x);
  // Continued fraction 1 / (x + (1/2) / (x + 1 / (x + (3/2) / (x + ...)))).
  double tail = x;
  for (int k = 60; k >= 1; --k) tail = x + 0.5 * k / tail;
  return 1.0 / (std::sqrt(std::numbers::pi) * tail);
}

double simplex_variance_approx(double mu, double lambda) {
  check_mean(mu);
  require(lambda > 0, "simplex variance: lambda must be positive");
  const double v = mu * (1.0 - mu);
  return v * v * v / lambda;
}

double simplex_variance_exact(double mu, double lambda) {
  check_mean(mu);
  require(lambda > 0, "simplex variance: lambda must be positive");
  const double v = mu * (1.0 - mu);
  const double z = lambda / (2.0 * v * v);
  const double x = std::sqrt(z);
  // mu(1-mu) - sqrt(lambda/2) e^z Gamma(1/2, z) = mu(1-mu) (1 - x sqrt(pi) erfcx(x)).
  double frac;
  if (x < 20.0) {
    frac = 1.0 - x * std::sqrt(std::numbers::pi) * erfcx(x);
  } else {
    // Asymptotic series of the same quantity, free of cancellation.
    const double u = 1.0 / (2.0 * z);
    double term = u;
    frac = 0.0;
    for (int k = 1; k <= 40; ++k) {
      frac += term;
      term *= -(2.0 * k + 1.0) * u;
      if (std::abs(term) < 1e-18 * std::abs(frac)) break;
    }
  }
  const double out = v * frac;
  if (!std::isfinite(out) || out <= 0) {
    fail(ErrorKind::numerical,
         "simplex variance: no significant digits left at this lambda");
  }
  return out;
}

InverseCdfTable::InverseCdfTable(
    const std::function<double(double)>& log_density, double center,
    double spread, std::size_t knots) {
  require(knots >= 64, "inverse cdf table: too few knots");
  require(center > 0 && center < 1, "inverse cdf table: center in (0, 1)");
  require(spread > 0, "inverse cdf table: spread must be positive");

  // Three quarters of the knots follow a Cauchy quantile grid around the
  // center in logit space, the rest are uniform over the whole range.
  const double t0 = logit(center);
  const double scale =
      std::clamp(spread / (center * (1.0 - center)), 1e-6, 5.0);
  const std::size_t n_cauchy = knots * 3 / 4;
  const std::size_t n_uniform = knots - n_cauchy;
  std::vector<double> t;
  t.reserve(knots);
  for (std::size_t i = 0; i < n_cauchy; ++i) {
    const double u = (i + 0.5) / static_cast<double>(n_cauchy);
    const double v = t0 + scale * std::tan(std::numbers::pi * (u - 0.5));
    if (std::abs(v) < kLogitRange) t.push_back(v);
  }
  for (std::size_t i = 0; i < n_uniform; ++i) {
    t.push_back(-kLogitRange +
                2.0 * kLogitRange * i / static_cast<double>(n_uniform - 1));
  }
  std::sort(t.begin(), t.end());
  t_.reserve(t.size());
  for (double v : t) {
    if (t_.empty() || v - t_.back() > 1e-12 * (1.0 + std::abs(v))) {
      t_.push_back(v);
    }
  }

  const auto log_g = [&](double tt) {
    return log_density(sigmoid(tt)) + log_jacobian(tt);
  };
  std::vector<double> lg(t_.size());
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t_.size(); ++i) {
    lg[i] = log_g(t_[i]);
    shift = std::max(shift, lg[i]);
  }
  if (!std::isfinite(shift)) {
    fail(ErrorKind::numerical, "inverse cdf table: density vanishes on grid");
  }
  const std::vector<double> panels = kernels::panel_integrals(log_g, t_, shift);

  cdf_.assign(t_.size(), 0.0);
  for (std::size_t i = 0; i < panels.size(); ++i) {
    cdf_[i + 1] = cdf_[i] + panels[i];
  }
  const double total = cdf_.back();
  raw_mass_ = total * std::exp(shift);
  if (!(total > 0) || !std::isfinite(raw_mass_)) {
    fail(ErrorKind::numerical, "inverse cdf table: quadrature failed");
  }
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;

  slope_.resize(t_.size());
  for (std::size_t i = 0; i < t_.size(); ++i) {
    slope_[i] = std::exp(lg[i] - shift) / total;
  }
  // Fritsch-Carlson limiter keeps each Hermite piece monotone.
  for (std::size_t i = 0; i + 1 < t_.size(); ++i) {
    const double h = t_[i + 1] - t_[i];
    const double secant = (cdf_[i + 1] - cdf_[i]) / h;
    if (secant <= 0) {
      slope_[i] = slope_[i + 1] = 0.0;
      continue;
    }
    const double a = slope_[i] / secant;
    const double b = slope_[i + 1] / secant;
    const double norm = a * a + b * b;
    if (norm > 9.0) {
      const double tau = 3.0 / std::sqrt(norm);
      slope_[i] = tau * a * secant;
      slope_[i + 1] = tau * b * secant;
    }
  }
}

double InverseCdfTable::hermite(std::size_t i, double t) const {
  const double h = t_[i + 1] - t_[i];
  const double u = (t - t_[i]) / h;
  const double u2 = u * u;
  const double u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * cdf_[i] + (u3 - 2 * u2 + u) * h * slope_[i] +
         (-2 * u3 + 3 * u2) * cdf_[i + 1] + (u3 - u2) * h * slope_[i + 1];
}

double InverseCdfTable::hermite_slope(std::size_t i, double t) const {
  const double h = t_[i + 1] - t_[i];
  const double u = (t - t_[i]) / h;
  const double u2 = u * u;
  return ((6 * u2 - 6 * u) * cdf_[i] + (6 * u - 6 * u2) * cdf_[i + 1]) / h +
         (3 * u2 - 4 * u + 1) * slope_[i] + (3 * u2 - 2 * u) * slope_[i + 1];
}

double InverseCdfTable::cdf(double y) const {
  if (!(y > 0)) return 0.0;
  if (!(y < 1)) return 1.0;
  const double t = logit(y);
  if (t <= t_.front()) return 0.0;
  if (t >= t_.back()) return 1.0;
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const auto i = static_cast<std::size_t>(it - t_.begin()) - 1;
  return std::clamp(hermite(i, t), cdf_[i], cdf_[i + 1]);
}

double InverseCdfTable::quantile(double u) const {
  require(u > 0 && u < 1, "inverse cdf table: probability must lie in (0, 1)");
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return sigmoid(t_.front());
  if (it == cdf_.end()) return sigmoid(t_.back());
  const auto i = static_cast<std::size_t>(it - cdf_.begin()) - 1;
  double lo = t_[i];
  double hi = t_[i + 1];
  double t = lo + (hi - lo) * (u - cdf_[i]) / (cdf_[i + 1] - cdf_[i]);
  for (int iter = 0; iter < 100; ++iter) {
    const double f = hermite(i, t) - u;
    if (f > 0) hi = t; else lo = t;
    const double d = hermite_slope(i, t);
    double next = d > 0 ? t - f / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) < 1e-14 * (1.0 + std::abs(t))) {
      t = next;
      break;
    }
    t = next;
  }
  return std::clamp(sigmoid(t), std::numeric_limits<double>::min(),
                    std::nextafter(1.0, 0.0));
}

StudentisedSimplexSampler::StudentisedSimplexSampler(double mu, double s,
                                                     double r,
                                                     std::size_t knots)
    : mu_(mu), s_(s), r_(r) {
  check_mean(mu);
  require(s > 0 && r > 0, "studentised simplex: s and r must be positive");
  const double spread = std::sqrt(simplex_variance_approx(mu, s / r));
  table_ = std::make_shared<const InverseCdfTable>(
      [mu, s, r](double y) { return studentised_simplex_logpdf(y, mu, s, r); },
      mu, spread, knots);
  if (std::abs(table_->raw_mass() - 1.0) > 1e-6) {
    fail(ErrorKind::numerical,
         "studentised simplex: density does not integrate to 1 on the table");
  }
}

double StudentisedSimplexSampler::sample(RandomSource& rng) const {
  return table_->quantile(rng.uniform());
}

std::vector<double> StudentisedSimplexSampler::sample(std::size_t n,
                                                      RandomSource& rng) const {
  std::vector<double> out(n);
  for (double& y : out) y = sample(rng);
  return out;
}

SimplexSampler::SimplexSampler(double mu, double lambda, std::size_t knots) {
  check_mean(mu);
  require(lambda > 0, "simplex: lambda must be positive");
  table_ = std::make_shared<const InverseCdfTable>(
      [mu, lambda](double y) { return simplex_logpdf(y, mu, lambda); }, mu,
      std::sqrt(simplex_variance_approx(mu, lambda)), knots);
  if (std::abs(table_->raw_mass() - 1.0) > 1e-6) {
    fail(ErrorKind::numerical,
         "simplex: density does not integrate to 1 on the table");
  }
}

double SimplexSampler::sample(RandomSource& rng) const {
  return table_->quantile(rng.uniform());
}

std::vector<double> studentised_simplex_sample(double mu, double s, double r,
                                               std::size_t n,
                                               RandomSource& rng) {
  return StudentisedSimplexSampler(mu, s, r).sample(n, rng);
}

}  // namespace elicit
