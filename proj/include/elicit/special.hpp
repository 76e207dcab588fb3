#pragma once

// Univariate special functions and distribution primitives shared by the
// engine. The infinite-degrees-of-freedom sentinel selects the normal limit in
// every t routine.

#include <cmath>
#include <functional>
#include <limits>

namespace elicit {

inline constexpr double kInfiniteDof = std::numeric_limits<double>::infinity();

inline bool is_infinite_dof(double dof) { return std::isinf(dof) && dof > 0; }

struct InversionOptions {
  double abs_tol = 1e-12;
  int max_iter = 200;
};

/// Solves cdf(x) = q for a continuous increasing cdf by bracketed bisection
/// with Newton refinement. `pdf` is the derivative of `cdf`. The bracket
/// [lo, hi] is expanded geometrically around `guess` until it straddles q.
double invert_monotone(const std::function<double(double)>& cdf,
                       const std::function<double(double)>& pdf, double q,
                       double guess, double initial_step,
                       InversionOptions opts = {});

double normal_pdf(double z);
double normal_cdf(double z);
double normal_quantile(double q);

double student_t_pdf(double z, double dof);
double student_t_logpdf(double z, double dof);
double student_t_cdf(double z, double dof);
double student_t_quantile(double q, double dof);

/// Gamma(shape, rate) distribution.
double gamma_logpdf(double x, double shape, double rate);
double gamma_cdf(double x, double shape, double rate);
double gamma_quantile(double q, double shape, double rate);

/// Law of exp(-G) with G ~ Gamma(shape_s / 2, rate_p); the probability of a
/// zero response in compound-Poisson elicitation.
double unit_gamma_pdf(double x, double s, double rate_p);
double unit_gamma_cdf(double x, double s, double rate_p);
/// Rate r_p at which x is the median of the unit gamma with shape s.
double unit_gamma_median_solve(double median, double s);
double unit_gamma_median(double s, double rate_p);

/// KL(Gamma(a1, b1) || Gamma(a2, b2)) for shape/rate parametrisations.
double gamma_kl(double shape1, double rate1, double shape2, double rate2);

}  // namespace elicit
