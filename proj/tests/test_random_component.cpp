#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "elicit/diagnostics.hpp"
#include "elicit/dispersion.hpp"
#include "elicit/error.hpp"
#include "elicit/special.hpp"

using namespace elicit;

namespace {

double probit(double q) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q); }

// Median of the unit gamma law found by bisection on a quadrature CDF.
double unit_gamma_median_oracle(double s, double rate_p) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const auto cdf = [&](double x) {
    return ts.integrate([&](double t) { return unit_gamma_pdf(t, s, rate_p); }, 0.0, x);
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an elicit::Error");
  return ErrorKind::domain;
}

}  // namespace

TEST_CASE("dispersion parameters round trip through forward-generated intervals") {
  const Family simplex = Family::simplex();
  const auto [d1, d2] = forward_dispersion_quantiles(14.3, 118.0, 0.01, 10.0, simplex);
  const DispersionSpec spec =
      elicit_dispersion(0.01, 10.0, d1, kDefaultAlpha1, d2, kDefaultAlpha2, simplex);
  CHECK(spec.s() == doctest::Approx(14.3).epsilon(1e-6));
  CHECK(spec.r() == doctest::Approx(118.0).epsilon(1e-6));
  CHECK(sample_mean_quantile((1 - kDefaultAlpha1) / 2, 0.01, *spec.v_phi, spec.s()) ==
        doctest::Approx(d1).epsilon(1e-8));
  CHECK(sample_mean_quantile((1 - kDefaultAlpha2) / 2, 0.01, *spec.v_phi, spec.s()) ==
        doctest::Approx(d2).epsilon(1e-8));
}

TEST_CASE("elicited intervals are reproduced for random settings") {
  RandomSource rng(8);
  for (int i = 0; i < 50; ++i) {
    const double s = std::exp(rng.uniform() * 6.0 - 1.0);
    const double r = std::exp(rng.uniform() * 6.0 - 2.0);
    const double mu0 = 0.5 + 5 * rng.uniform();
    const double w = 1 + std::floor(20 * rng.uniform());
    const Family fam = Family::gamma();
    const auto [d1, d2] = forward_dispersion_quantiles(s, r, mu0, w, fam, 0.2, 0.8);
    const DispersionSpec spec = elicit_dispersion(mu0, w, d1, 0.2, d2, 0.8, fam);
    CHECK(sample_mean_quantile(0.4, mu0, *spec.v_phi, spec.s()) == doctest::Approx(d1).epsilon(1e-8));
    CHECK(sample_mean_quantile(0.1, mu0, *spec.v_phi, spec.s()) == doctest::Approx(d2).epsilon(1e-8));
    CHECK(spec.s() == doctest::Approx(s).epsilon(1e-6));
  }
}

TEST_CASE("ratio bound is the normal quantile ratio and is exclusive") {
  const double bound = dispersion_ratio_bound(1.0 / 3.0, 0.9);
  CHECK(bound == doctest::Approx(probit(1.0 / 3.0) / probit(0.05)).epsilon(1e-14));
  CHECK(dispersion_ratio(1e9, 1.0 / 3.0, 0.9) == doctest::Approx(bound).epsilon(1e-8));
  const double mu0 = 1.0, d2 = 0.5;
  const double d1_at = mu0 - bound * (mu0 - d2);
  try {
    elicit_dispersion(mu0, 10.0, d1_at, 1.0 / 3.0, d2, 0.9, Family::gamma());
    FAIL("ratio at the bound was accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::inconsistent_with_t);
    REQUIRE(e.admissible().has_value());
    CHECK(e.admissible()->hi == doctest::Approx(bound));
  }
  CHECK_NOTHROW(elicit_dispersion(mu0, 10.0, mu0 - 0.95 * bound * (mu0 - d2), 1.0 / 3.0, d2,
                                  0.9, Family::gamma()));
}

TEST_CASE("interval ordering violations are domain errors") {
  CHECK(kind_of([] { elicit_dispersion(1.0, 10, 1.1, 1.0 / 3, 0.5, 0.9, Family::gamma()); }) ==
        ErrorKind::domain);
  CHECK(kind_of([] { elicit_dispersion(1.0, 10, 0.4, 1.0 / 3, 0.5, 0.9, Family::gamma()); }) ==
        ErrorKind::domain);
  CHECK(kind_of([] { elicit_dispersion(1.0, 10, 0.8, 0.9, 0.5, 1.0 / 3, Family::gamma()); }) ==
        ErrorKind::domain);
}

TEST_CASE("Berry-Esseen bound") {
  CHECK(berry_esseen_bound(3.0, 100.0) == doctest::Approx(0.469 * std::sqrt(3.0) / 10.0));
  CHECK(berry_esseen_bound(3.0, 100.0) == doctest::Approx(0.0812332).epsilon(1e-6));
  CHECK(berry_esseen_bound(5.0, 40.0) == doctest::Approx(2 * berry_esseen_bound(5.0, 160.0)));
  CHECK(berry_esseen_bound(1.0, 9.0) == doctest::Approx(0.469 / 3.0));
  CHECK_THROWS_AS(berry_esseen_bound(0.5, 9.0), Error);
}

TEST_CASE("power parameter round trips through the unit gamma median") {
  const double mu0 = 2.0, w = 10.0, s = 9.0, v_phi = 0.3;
  const double upper = power_rate_upper_bound(mu0, w, s, v_phi);
  CHECK(upper == doctest::Approx(v_phi * w * s / (2 * mu0 * mu0)));
  for (double p_star : {1.05, 1.3, 1.6, 1.95}) {
    const double r_p = upper * (2.0 - p_star);
    const double c0 = unit_gamma_median_oracle(s, r_p);
    const PowerParam pp = elicit_power_parameter(c0, mu0, w, s, v_phi);
    CHECK(pp.p == doctest::Approx(p_star).epsilon(1e-6));
    CHECK(pp.r_p == doctest::Approx(r_p).epsilon(1e-8));
    CHECK(pp.r > 0);
  }
}

TEST_CASE("power rate follows the linear map and the known-p shortcut") {
  const double mu0 = 2.0, w = 10.0, s = 9.0, v_phi = 0.3;
  const double upper = power_rate_upper_bound(mu0, w, s, v_phi);
  const PowerParam near_top =
      elicit_power_parameter(unit_gamma_median(s, upper * 0.999), mu0, w, s, v_phi);
  CHECK(near_top.p == doctest::Approx(1.001).epsilon(1e-8));
  const PowerParam near_zero =
      elicit_power_parameter(unit_gamma_median(s, upper * 0.01), mu0, w, s, v_phi);
  CHECK(near_zero.p == doctest::Approx(1.99).epsilon(1e-8));
  CHECK(power_rate_known_p(1.5, mu0, w, s, v_phi) ==
        doctest::Approx(v_phi * w * s / std::pow(mu0, 1.5)));
}

TEST_CASE("infeasible power median is rejected with the admissible interval") {
  const double mu0 = 2.0, w = 10.0, s = 9.0, v_phi = 0.3;
  const double upper = power_rate_upper_bound(mu0, w, s, v_phi);
  const double c_edge = unit_gamma_median(s, upper);
  for (double c0 : {c_edge, 0.5 * (c_edge + 1.0)}) {
    try {
      elicit_power_parameter(c0, mu0, w, s, v_phi);
      FAIL("infeasible c0 accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::infeasible_power);
      REQUIRE(e.admissible().has_value());
      CHECK(e.admissible()->hi == doctest::Approx(c_edge).epsilon(1e-10));
    }
  }
  CHECK_NOTHROW(elicit_power_parameter(0.99 * c_edge, mu0, w, s, v_phi));
}

TEST_CASE("lognormal base change") {
  Eigen::VectorXd d(2);
  d << 1.0, -2.0;
  Eigen::MatrixXd S(2, 2);
  S << 2.0, 0.5, 0.5, 1.0;
  const auto [de, Se] = lognormal_transform(d, S, std::numbers::e);
  CHECK((de - d).norm() < 1e-15);
  CHECK((Se - S).norm() < 1e-15);
  const auto [d10, S10] = lognormal_transform(d, S, 10.0);
  CHECK(d10(0) == doctest::Approx(2.302585093));
  CHECK(Eigen::LLT<Eigen::MatrixXd>(S10).info() == Eigen::Success);
  S(0, 1) = S(1, 0) = 3.0;
  CHECK_THROWS_AS(lognormal_transform(d, S, 10.0), Error);
}

TEST_CASE("DKW epsilon formula") {
  CHECK(dkw_epsilon(2000, 0.05) == doctest::Approx(std::sqrt(std::log(2.0 / 0.05) / 4000.0)));
}

TEST_CASE("Kolmogorov distance handles ties") {
  // Uniform cdf; the sample {0.5, 0.5} jumps from 0 to 1 at 0.5.
  const auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(kolmogorov_distance({0.5, 0.5}, cdf) == doctest::Approx(0.5));
  CHECK(kolmogorov_distance({0.25, 0.75}, cdf) == doctest::Approx(0.25));
  CHECK(kolmogorov_distance({0.1, 0.1, 0.9}, cdf) == doctest::Approx(2.0 / 3.0 - 0.1));
}

TEST_CASE("known dispersion draws carry lambda = 1/phi") {
  const DispersionSpec spec = DispersionSpec::known(0.25);
  const auto pairs = sample_mean_mc(Family::gamma(), 3.0, 5.0, spec, 500, 1);
  for (const auto& p : pairs) CHECK(p.lambda == 4.0);
}

TEST_CASE("sample means are unbiased and seeded draws reproduce") {
  const Family fam = Family::poisson();
  const DispersionSpec spec = dispersion_from_parameters(8.0, 6.0, 3.0, 10.0, fam);
  const auto a = sample_mean_mc(fam, 3.0, 10.0, spec, 20000, 99);
  const auto b = sample_mean_mc(fam, 3.0, 10.0, spec, 20000, 99);
  double sum = 0, sum2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mean == b[i].mean);
    sum += a[i].mean;
    sum2 += a[i].mean * a[i].mean;
  }
  const double m = sum / a.size(), sd = std::sqrt(sum2 / a.size() - m * m);
  CHECK(std::abs(m - 3.0) < 5 * sd / std::sqrt(a.size()));
}

TEST_CASE("lambda draws follow Gamma(s/2, r/2)") {
  const Family fam = Family::gamma();
  const DispersionSpec spec = dispersion_from_parameters(6.0, 4.0, 1.0, 10.0, fam);
  const auto pairs = sample_mean_mc(fam, 1.0, 10.0, spec, 20000, 4);
  std::vector<double> lambdas;
  for (const auto& p : pairs) lambdas.push_back(p.lambda);
  const double d = kolmogorov_distance(lambdas, [](double x) { return gamma_cdf(x, 3.0, 2.0); });
  CHECK(d < dkw_epsilon(lambdas.size(), 0.001));
}

TEST_CASE("simplex sample means need the no-convolution acknowledgement") {
  const Family fam = Family::simplex();
  const DispersionSpec spec = dispersion_from_parameters(14.3, 118.0, 0.01, 10.0, fam);
  CHECK(kind_of([&] { sample_mean_mc(fam, 0.01, 10.0, spec, 200, 1); }) == ErrorKind::unsupported);
  SampleMeanOptions opts;
  opts.acknowledge_no_convolution = true;
  CHECK(sample_mean_mc(fam, 0.01, 10.0, spec, 200, 1, opts).size() == 200);
}

TEST_CASE("normal family log-ratio is identically zero") {
  const Family fam = Family::normal();
  const DispersionSpec spec = dispersion_from_parameters(6.0, 8.0, 0.0, 10.0, fam);
  const auto rep = discrepancy_report(sample_mean_mc(fam, 0.0, 10.0, spec, 1000, 3), fam, 0.0, 10.0,
                                      spec);
  CHECK(*rep.kl_estimate == 0.0);
  CHECK(*rep.kl_stderr == 0.0);
  CHECK_FALSE(rep.partial);
}

TEST_CASE("compound Poisson report is Kolmogorov only") {
  const Family fam = Family::compound_poisson(1.5);
  const DispersionSpec spec = dispersion_from_parameters(6.0, 8.0, 2.0, 10.0, fam);
  const auto rep = discrepancy_report(sample_mean_mc(fam, 2.0, 10.0, spec, 500, 3), fam, 2.0, 10.0,
                                      spec);
  CHECK(rep.partial);
  CHECK_FALSE(rep.kl_estimate.has_value());
  CHECK(rep.kolmogorov > 0.0);
}

TEST_CASE("gamma KL estimate is stable under refinement") {
  const Family fam = Family::gamma();
  const DispersionSpec spec = dispersion_from_parameters(6.0, 3.0, 1.0, 3.0, fam);
  const auto small = discrepancy_report(sample_mean_mc(fam, 1.0, 3.0, spec, 10000, 21), fam, 1.0,
                                        3.0, spec);
  const auto big = discrepancy_report(sample_mean_mc(fam, 1.0, 3.0, spec, 100000, 22), fam, 1.0,
                                      3.0, spec);
  CHECK(*big.kl_estimate > 0.0);
  CHECK(std::abs(*big.kl_estimate - *small.kl_estimate) <= 3.0 * *small.kl_stderr);
}

TEST_CASE("reference and OpenMP reports agree") {
  const Family fam = Family::gamma();
  const DispersionSpec spec = dispersion_from_parameters(6.0, 3.0, 1.0, 3.0, fam);
  const auto pairs = sample_mean_mc(fam, 1.0, 3.0, spec, 5000, 2);
  const auto a = discrepancy_report(pairs, fam, 1.0, 3.0, spec, 0.05, kernels::Backend::reference);
  const auto b = discrepancy_report(pairs, fam, 1.0, 3.0, spec, 0.05, kernels::Backend::omp);
  CHECK(a.kolmogorov == b.kolmogorov);
  CHECK(*a.kl_estimate == *b.kl_estimate);
}

TEST_CASE("DKW band covers the exact t law at the nominal rate") {
  // For the normal family the t approximation is exact, so the band should
  // fail in at most about alpha of the runs.
  const Family fam = Family::normal();
  const DispersionSpec spec = dispersion_from_parameters(6.0, 8.0, 0.0, 10.0, fam);
  int covered = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto rep = discrepancy_report(sample_mean_mc(fam, 0.0, 10.0, spec, 2000, i), fam, 0.0,
                                        10.0, spec);
    covered += rep.kolmogorov <= rep.dkw_epsilon;
  }
  CHECK(covered / 200.0 >= 0.95);
}
