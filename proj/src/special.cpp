#include "elicit/special.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <numbers>

#include "elicit/error.hpp"

namespace elicit {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::inconsistent_with_t: return "inconsistent_with_t";
    case ErrorKind::check_violation: return "check_violation";
    case ErrorKind::infeasible_power: return "infeasible_power";
    case ErrorKind::solver: return "solver";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::illegal_transition: return "illegal_transition";
    case ErrorKind::parse: return "parse";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::io: return "io";
    case ErrorKind::conflict: return "conflict";
  }
  return "unknown";
}

double invert_monotone(const std::function<double(double)>& cdf,
                       const std::function<double(double)>& pdf, double q,
                       double guess, double initial_step,
                       InversionOptions opts) {
  double step = initial_step;
  double lo = guess - step;
  double hi = guess + step;
  int expand = 0;
  while (cdf(lo) > q) {
    step *= 2.0;
    lo = guess - step;
    if (++expand > 2000 || !std::isfinite(lo))
      fail(ErrorKind::solver, "quantile inversion: cannot bracket from below");
  }
  step = initial_step;
  expand = 0;
  while (cdf(hi) < q) {
    step *= 2.0;
    hi = guess + step;
    if (++expand > 2000 || !std::isfinite(hi))
      fail(ErrorKind::solver, "quantile inversion: cannot bracket from above");
  }

  double x = std::clamp(guess, lo, hi);
  for (int it = 0; it < opts.max_iter; ++it) {
    const double f = cdf(x) - q;
    if (f == 0.0) return x;
    if (f < 0) lo = x; else hi = x;

    const double d = pdf(x);
    double next = (d > 0) ? x - f / d : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);

    const double tol = opts.abs_tol * (1.0 + std::abs(next));
    if (std::abs(next - x) < tol || (hi - lo) < tol) return next;
    x = next;
  }
  return x;
}

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double q) {
  require(q > 0.0 && q < 1.0, "normal_quantile: q must lie in (0,1)");
  if (q == 0.5) return 0.0;
  if (q > 0.5) return -normal_quantile(1.0 - q);
  return invert_monotone(normal_cdf, normal_pdf, q, 0.0, 1.0);
}

double student_t_logpdf(double z, double dof) {
  require(dof > 0, "student_t: degrees of freedom must be positive");
  if (is_infinite_dof(dof))
    return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
         0.5 * std::log(dof * std::numbers::pi) -
         0.5 * (dof + 1.0) * std::log1p(z * z / dof);
}

double student_t_pdf(double z, double dof) {
  return std::exp(student_t_logpdf(z, dof));
}

double student_t_cdf(double z, double dof) {
  require(dof > 0, "student_t: degrees of freedom must be positive");
  if (is_infinite_dof(dof)) return normal_cdf(z);
  if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
  const double z2 = z * z;
  if (z2 < dof) {
    // Central form keeps relative accuracy near the median.
    const double central =
        boost::math::ibeta(0.5, 0.5 * dof, z2 / (dof + z2));
    return z < 0 ? 0.5 - 0.5 * central : 0.5 + 0.5 * central;
  }
  const double tail = 0.5 * boost::math::ibeta(0.5 * dof, 0.5, dof / (dof + z2));
  return z < 0 ? tail : 1.0 - tail;
}

double student_t_quantile(double q, double dof) {
  require(q > 0.0 && q < 1.0, "student_t_quantile: q must lie in (0,1)");
  require(dof > 0, "student_t_quantile: degrees of freedom must be positive");
  if (q == 0.5) return 0.0;
  if (q > 0.5) return -student_t_quantile(1.0 - q, dof);
  if (is_infinite_dof(dof)) return normal_quantile(q);
  return invert_monotone([dof](double z) { return student_t_cdf(z, dof); },
                         [dof](double z) { return student_t_pdf(z, dof); }, q,
                         normal_quantile(q), 1.0);
}

double gamma_logpdf(double x, double shape, double rate) {
  require(shape > 0 && rate > 0, "gamma: shape and rate must be positive");
  if (x <= 0) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
         std::lgamma(shape);
}

double gamma_cdf(double x, double shape, double rate) {
  require(shape > 0 && rate > 0, "gamma: shape and rate must be positive");
  if (x <= 0) return 0.0;
  return boost::math::gamma_p(shape, rate * x);
}

double gamma_quantile(double q, double shape, double rate) {
  require(q > 0.0 && q < 1.0, "gamma_quantile: q must lie in (0,1)");
  require(shape > 0 && rate > 0, "gamma: shape and rate must be positive");
  // Invert on the log scale so the bracket never leaves the support.
  const double y = invert_monotone(
      [shape](double ly) { return boost::math::gamma_p(shape, std::exp(ly)); },
      [shape](double ly) {
        const double x = std::exp(ly);
        return std::exp(gamma_logpdf(x, shape, 1.0) + ly);
      },
      q, std::log(shape), 1.0);
  return std::exp(y) / rate;
}

double unit_gamma_pdf(double x, double s, double rate_p) {
  require(s > 0 && rate_p > 0, "unit_gamma: parameters must be positive");
  require(x > 0 && x < 1, "unit_gamma: x must lie in (0,1)");
  const double a = 0.5 * s;
  const double nl = -std::log(x);
  return std::exp(a * std::log(rate_p) + (rate_p - 1.0) * std::log(x) +
                  (a - 1.0) * std::log(nl) - std::lgamma(a));
}

double unit_gamma_cdf(double x, double s, double rate_p) {
  require(s > 0 && rate_p > 0, "unit_gamma: parameters must be positive");
  require(x > 0 && x < 1, "unit_gamma: x must lie in (0,1)");
  return boost::math::gamma_q(0.5 * s, -rate_p * std::log(x));
}

double unit_gamma_median_solve(double median, double s) {
  require(median > 0 && median < 1, "unit_gamma: median must lie in (0,1)");
  require(s > 0, "unit_gamma: s must be positive");
  return gamma_quantile(0.5, 0.5 * s, 1.0) / -std::log(median);
}

double unit_gamma_median(double s, double rate_p) {
  return std::exp(-gamma_quantile(0.5, 0.5 * s, rate_p));
}

double gamma_kl(double shape1, double rate1, double shape2, double rate2) {
  require(shape1 > 0 && rate1 > 0 && shape2 > 0 && rate2 > 0,
          "gamma_kl: parameters must be positive");
  return (shape1 - shape2) * boost::math::digamma(shape1) -
         std::lgamma(shape1) + std::lgamma(shape2) +
         shape2 * (std::log(rate1) - std::log(rate2)) +
         shape1 * (rate2 - rate1) / rate1;
}

}  // namespace elicit
