#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "elicit/induced_prior.hpp"
#include "support/oracle.hpp"

using namespace elicit;

namespace {

Eigen::MatrixXd random_matrix(int r, int c, std::mt19937_64& g) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) a(i, j) = z(g);
  return a;
}

double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

InduceOptions same(const Family& f) {
  InduceOptions o;
  o.elicited = f;
  o.target = f;
  return o;
}

}  // namespace

TEST_CASE("identity design returns the elicited model") {
  std::mt19937_64 g(1);
  const Eigen::MatrixXd V = oracle::random_spd(4, g);
  const Eigen::VectorXd m = oracle::random_location(4, g);
  const DispersionSpec spec = dispersion_from_parameters(14.3, 118.0, 0.01, 10, Family::simplex());
  const InducedPrior ip = induce_prior(m, V, spec, DesignMatrix::identity(4), same(Family::simplex()));
  CHECK(max_abs(ip.delta - m) < 1e-12);
  CHECK(max_abs(ip.sigma - V) < 1e-12);
  CHECK(max_abs(ip.A - Eigen::MatrixXd::Identity(4, 4)) < 1e-10);
  CHECK(ip.q == 1.0);
  CHECK(ip.prior.shape() == 14.3);
  CHECK(ip.prior.rate() == 118.0);
}

TEST_CASE("square design inverts the elicited model") {
  std::mt19937_64 g(2);
  const Eigen::MatrixXd V = oracle::random_spd(5, g);
  const Eigen::VectorXd m = oracle::random_location(5, g);
  const Eigen::MatrixXd X = random_matrix(5, 5, g);
  const DispersionSpec spec = DispersionSpec::known(1.0);
  const InducedPrior ip = induce_prior(m, V, spec, DesignMatrix(X), same(Family::normal()));
  const Eigen::MatrixXd Xi = X.inverse();
  CHECK(max_abs(ip.delta - Xi * m) < 1e-9);
  CHECK(max_abs(ip.sigma - Xi * V * Xi.transpose()) < 1e-9);
  CHECK(induced_divergence(m, V, spec, DesignMatrix(X), ip) <= 1e-10);
}

TEST_CASE("projection onto fewer columns satisfies the normal equations") {
  std::mt19937_64 g(3);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 6, p = 1 + rep % 5;
    const Eigen::MatrixXd V = oracle::random_spd(n, g);
    const Eigen::VectorXd m = oracle::random_location(n, g);
    const Eigen::MatrixXd X = random_matrix(n, p, g);
    const InducedPrior ip = induce_prior(m, V, DispersionSpec::known(1.0), DesignMatrix(X),
                                         same(Family::normal()));
    const Eigen::MatrixXd Vi = V.inverse();
    const Eigen::MatrixXd G = (X.transpose() * Vi * X).inverse();
    CHECK(max_abs(ip.delta - G * X.transpose() * Vi * m) < 1e-10);
    CHECK(max_abs(ip.sigma - G) < 1e-10);
    CHECK(max_abs(ip.A * ip.A - ip.A) < 1e-10);
    CHECK(max_abs(ip.A * X - X) < 1e-10);
    CHECK(max_abs(X.transpose() * Vi * (m - ip.A * m)) < 1e-10);
    // Column space of A equals that of X.
    Eigen::MatrixXd both(n, 2 * n);
    both << ip.A, X, Eigen::MatrixXd::Zero(n, n - p);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(both);
    qr.setThreshold(1e-10);
    CHECK(qr.rank() == p);
  }
}

TEST_CASE("rank-deficient designs are rejected") {
  Eigen::MatrixXd X(3, 2);
  X << 1, 2, 1, 2, 1, 2;
  CHECK_THROWS_AS(DesignMatrix{X}, Error);
  CHECK_THROWS_AS(DesignMatrix(Eigen::MatrixXd::Ones(2, 3)), Error);
}

TEST_CASE("target family scales the induced rate") {
  std::mt19937_64 g(4);
  const Eigen::MatrixXd V = oracle::random_spd(3, g);
  const Eigen::VectorXd m = oracle::random_location(3, g);
  const DispersionSpec spec = dispersion_from_parameters(8.0, 6.0, 2.0, 10, Family::gamma());
  InduceOptions o;
  o.elicited = Family::gamma();
  o.target = Family::inverse_gaussian();
  const InducedPrior ip = induce_prior(m, V, spec, DesignMatrix::identity(3), o);
  // q = v(mu0) / v'(mu0) = 4 / 8.
  CHECK(ip.q == doctest::Approx(0.5));
  CHECK(ip.prior.shape() == 8.0);
  CHECK(ip.prior.rate() == doctest::Approx(3.0));
  CHECK(max_abs(ip.sigma - V / 0.5) < 1e-12);

  InduceOptions k;
  k.elicited = Family::poisson();
  k.target = Family::normal();
  k.target_phi = 3.0;
  const InducedPrior kp = induce_prior(m, V, DispersionSpec::known(1.0), DesignMatrix::identity(3), k);
  CHECK(kp.q == doctest::Approx(3.0));
  CHECK(kp.prior.is_known());
}

TEST_CASE("missing mu0 is an error when families differ") {
  const DispersionSpec spec = dispersion_from_parameters(8.0, 6.0, 2.0, 10, Family::gamma());
  DispersionSpec bare = spec;
  bare.mu0.reset();
  InduceOptions o;
  o.elicited = Family::gamma();
  o.target = Family::poisson();
  CHECK_THROWS_AS(induce_prior(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), bare,
                               DesignMatrix::identity(2), o),
                  Error);
  o.mu0 = 2.0;
  CHECK_NOTHROW(induce_prior(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), bare,
                             DesignMatrix::identity(2), o));
}

TEST_CASE("normal KL divergence") {
  Eigen::VectorXd a(1), b(1);
  a << 0.0;
  b << 1.0;
  const Eigen::MatrixXd I1 = Eigen::MatrixXd::Identity(1, 1);
  CHECK(kl_normal(a, I1, b, I1, 1.0) == doctest::Approx(0.5));
  std::mt19937_64 g(5);
  const Eigen::MatrixXd S = oracle::random_spd(3, g);
  const Eigen::VectorXd v = oracle::random_location(3, g);
  CHECK(kl_normal(v, S, v, S, 2.0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("normal KL matches a Monte Carlo log-ratio") {
  std::mt19937_64 g(6);
  const Eigen::MatrixXd S = oracle::random_spd(3, g), Sp = oracle::random_spd(3, g);
  const Eigen::VectorXd a = oracle::random_location(3, g), b = oracle::random_location(3, g);
  const double lambda = 1.7;
  const Eigen::MatrixXd L = (S / lambda).llt().matrixL();
  const auto logpdf = [](const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& C) {
    const Eigen::LLT<Eigen::MatrixXd> llt(C);
    const Eigen::VectorXd z = llt.matrixL().solve(x - mu);
    const double logdet = 2 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * z.squaredNorm() - 0.5 * logdet;
  };
  std::normal_distribution<double> z;
  const int N = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < N; ++i) {
    Eigen::VectorXd e(3);
    for (int j = 0; j < 3; ++j) e(j) = z(g);
    const Eigen::VectorXd x = a + L * e;
    const double t = logpdf(x, a, S / lambda) - logpdf(x, b, Sp / lambda);
    s += t;
    s2 += t * t;
  }
  const double mean = s / N, se = std::sqrt((s2 / N - mean * mean) / N);
  CHECK(std::abs(kl_normal(a, S, b, Sp, lambda) - mean) < 3 * se);
}

TEST_CASE("truncation divergence") {
  Eigen::MatrixXd R(2, 2);
  R << 1.0, 0.8, 0.8, 1.0;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  CHECK(truncation_divergence(R, I) == doctest::Approx(-0.5 * std::log(1 - 0.64)).epsilon(1e-14));
  CHECK(truncation_divergence(R, I) == doctest::Approx(0.5108).epsilon(1e-4));
  CHECK(truncation_divergence(R, R) == doctest::Approx(0.0).scale(1.0));
  CHECK(kTruncationThreshold == doctest::Approx(1.1513).epsilon(1e-4));
  CHECK_THROWS_AS(truncation_divergence(R, Eigen::MatrixXd::Identity(3, 3)), Error);
}

TEST_CASE("truncation divergence agrees with its Monte Carlo estimate") {
  std::mt19937_64 g(8);
  const PrecisionPrior prior = PrecisionPrior::gamma(14.3, 118.0);
  const Link link(LinkKind::logit);
  for (int rep = 0; rep < 3; ++rep) {
    const Eigen::MatrixXd V = oracle::random_spd(4, g);
    const Eigen::VectorXd m = oracle::random_location(4, g);
    const VineState st = oracle::run_vine(m, V, link, prior);
    for (int t = 0; t < 3; ++t) {
      const auto [Vt, Rt] = st.truncate(t);
      const double exact = truncation_divergence(st.correlation(), Rt);
      const McEstimate mc = truncation_divergence_mc(st.m(), st.V(), Vt, prior, 100000, 40 + t);
      CHECK(std::abs(exact - mc.estimate) < 3 * mc.stderr_);
    }
    const auto [Vf, Rf] = st.truncate(3);
    CHECK(truncation_divergence(st.correlation(), Rf) == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("truncation scan marks substantial divergences") {
  std::mt19937_64 g(10);
  const PrecisionPrior prior = PrecisionPrior::gamma(14.3, 118.0);
  const VineState st = oracle::run_vine(oracle::random_location(5, g), oracle::random_spd(5, g),
                                        Link(LinkKind::logit), prior);
  const auto scan = truncation_scan(st);
  REQUIRE(scan.size() == 5);
  for (std::size_t i = 0; i < scan.size(); ++i) {
    CHECK(scan[i].t == static_cast<int>(i));
    CHECK(scan[i].substantial == (scan[i].divergence > kTruncationThreshold));
    if (i) CHECK(scan[i].divergence <= scan[i - 1].divergence + 1e-12);
  }
  CHECK(scan.back().divergence == doctest::Approx(0.0).scale(1.0));
}
