#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "elicit/induced_prior.hpp"
#include "elicit/vine.hpp"
#include "support/oracle.hpp"

using namespace elicit;

namespace {

// Partial correlation of (l, k) given 0..l-1 from the inverse of the
// principal submatrix on {0..l-1, l, k}.
double pcorr_oracle(const Eigen::MatrixXd& S, int l, int k) {
  std::vector<int> idx;
  for (int i = 0; i <= l; ++i) idx.push_back(i);
  idx.push_back(k);
  const int d = static_cast<int>(idx.size());
  Eigen::MatrixXd sub(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) sub(a, b) = S(idx[a], idx[b]);
  const Eigen::MatrixXd P = sub.inverse();
  return -P(d - 2, d - 1) / std::sqrt(P(d - 2, d - 2) * P(d - 1, d - 1));
}

Eigen::MatrixXd random_pcorr(int n, std::mt19937_64& g, double bound = 0.95) {
  std::uniform_real_distribution<double> u(-bound, bound);
  Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(n, n);
  for (int l = 0; l < n; ++l)
    for (int k = l + 1; k < n; ++k) rho(l, k) = u(g);
  return rho;
}

bool is_spd(const Eigen::MatrixXd& m) { return Eigen::LLT<Eigen::MatrixXd>(m).info() == Eigen::Success; }

const Link kLogit(LinkKind::logit);
const Link kIdentity(LinkKind::identity);

}  // namespace

TEST_CASE("marginal from a central interval") {
  const auto [m, v] = elicit_marginal({0, -1.0, 1.0, 0.5}, kIdentity, PrecisionPrior::known(1.0));
  CHECK(m == doctest::Approx(0.0).scale(1.0));
  CHECK(v == doctest::Approx(std::pow(1.0 / 0.6744897501960817, 2)).epsilon(1e-12));
  CHECK(v == doctest::Approx(2.19810).epsilon(1e-5));
  const auto [ml, vl] = elicit_marginal({0, 0.25, 0.75, 0.5}, kLogit, PrecisionPrior::gamma(5, 3));
  CHECK(std::abs(ml) < 1e-15);
  CHECK(vl > 0);
}

TEST_CASE("marginal feedback reproduces the elicited interval") {
  const PrecisionPrior prior = PrecisionPrior::gamma(14.3, 118.0);
  VineState st(1);
  const auto [m, v] = elicit_marginal({0, 0.1, 0.3, 1.0 / 3.0}, kLogit, prior);
  st.set_marginal(0, m, v);
  const CurveBundle cb = marginal_feedback(st, 0, kLogit, prior, {1.0 / 3.0, 0.5, 2.0 / 3.0});
  CHECK(cb.quantiles[0] == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(cb.quantiles[2] == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(cb.median == doctest::Approx(kLogit.inverse(m)).epsilon(1e-14));
  CHECK(cb.quantiles[1] == doctest::Approx(cb.median).epsilon(1e-12));
}

TEST_CASE("marginal feedback curves are a proper distribution") {
  const PrecisionPrior prior = PrecisionPrior::gamma(6.0, 9.0);
  for (LinkKind kind : {LinkKind::logit, LinkKind::log, LinkKind::inverse, LinkKind::cloglog}) {
    const Link link(kind);
    VineState st(1);
    // For the inverse link keep the 1e-5 quantile of eta above zero.
    if (kind == LinkKind::inverse)
      st.set_marginal(0, 5.0, 0.05);
    else
      st.set_marginal(0, -0.7, 0.3);
    const CurveBundle cb = marginal_feedback(st, 0, link, prior, {0.1, 0.5, 0.9}, 801);
    double mass = 0;
    for (std::size_t i = 0; i + 1 < cb.grid.size(); ++i) {
      CHECK(cb.density[i] >= 0.0);
      CHECK(cb.cdf[i + 1] >= cb.cdf[i]);
      mass += 0.5 * (cb.density[i] + cb.density[i + 1]) * (cb.grid[i + 1] - cb.grid[i]);
    }
    INFO(link.name());
    CHECK(mass == doctest::Approx(cb.cdf.back() - cb.cdf.front()).epsilon(1e-4));
    CHECK(cb.quantiles[0] < cb.quantiles[1]);
    CHECK(cb.quantiles[1] < cb.quantiles[2]);
    // Density is the derivative of the cdf.
    const std::size_t i = cb.grid.size() / 2;
    const double x = cb.grid[i], h = 1e-6 * std::max(1.0, std::abs(x));
    const GenT1 eta(st.m()(0), st.V()(0, 0), prior);
    const auto F = [&](double y) {
      const double p = eta.cdf(link.forward(y));
      return link.slope_sign() > 0 ? p : 1.0 - p;
    };
    CHECK(cb.density[i] == doctest::Approx((F(x + h) - F(x - h)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("conditional law matches a Schur-complement oracle") {
  std::mt19937_64 g(9);
  const int n = 4;
  const Eigen::MatrixXd V = oracle::random_spd(n, g);
  const Eigen::VectorXd m = oracle::random_location(n, g);
  const PrecisionPrior prior = PrecisionPrior::gamma(7.0, 5.0);
  const VineState st = oracle::run_vine(m, V, kIdentity, prior);
  const Eigen::VectorXd eta = st.eta_hat();
  for (int level = 0; level < n; ++level) {
    for (int k = level; k < n; ++k) {
      const ConditionalT c = st.conditional(k, level, prior);
      if (level == 0) {
        CHECK(c.location == doctest::Approx(m(k)).epsilon(1e-10));
        CHECK(c.scale == doctest::Approx(V(k, k)).epsilon(1e-10));
        CHECK(c.prior == prior);
        continue;
      }
      const Eigen::MatrixXd A = V.topLeftCorner(level, level);
      const Eigen::VectorXd d = eta.head(level) - m.head(level);
      const Eigen::VectorXd b = V.row(k).head(level).transpose();
      const Eigen::MatrixXd Ainv = A.inverse();
      CHECK(c.location == doctest::Approx(m(k) + b.dot(Ainv * d)).epsilon(1e-10));
      CHECK(c.scale == doctest::Approx(V(k, k) - b.dot(Ainv * b)).epsilon(1e-10));
      CHECK(c.prior.shape() == doctest::Approx(7.0 + level).epsilon(1e-12));
      CHECK(c.prior.rate() == doctest::Approx(5.0 + d.dot(Ainv * d)).epsilon(1e-10));
    }
  }
}

TEST_CASE("oracle expert recovers the scale matrix") {
  std::mt19937_64 g(2024);
  const PrecisionPrior prior = PrecisionPrior::gamma(14.3, 118.0);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 2 + rep % 6;
    const Eigen::MatrixXd V = oracle::random_spd(n, g);
    const Eigen::VectorXd m = oracle::random_location(n, g);
    const VineState st = oracle::run_vine(m, V, kLogit, prior);
    CHECK(st.completed_levels() == n - 1);
    CHECK((st.m() - m).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((st.V() - V).cwiseAbs().maxCoeff() < 1e-8);
    for (int l = 0; l < n; ++l)
      for (int k = l + 1; k < n; ++k)
        CHECK(st.rho()(l, k) == doctest::Approx(pcorr_oracle(V, l, k)).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("conditional scales never increase with the level") {
  std::mt19937_64 g(31);
  const PrecisionPrior prior = PrecisionPrior::gamma(5.0, 4.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 3 + rep % 4;
    const VineState st =
        oracle::run_vine(oracle::random_location(n, g), oracle::random_spd(n, g), kLogit, prior);
    const Eigen::MatrixXd& cs = st.cond_scales();
    for (int k = 0; k < n; ++k) {
      double prev = st.V()(k, k);
      for (int l = 0; l < k; ++l) {
        if (std::isnan(cs(k, l))) continue;
        CHECK(cs(k, l) > 0.0);
        CHECK(cs(k, l) <= prev);
        prev = cs(k, l);
      }
    }
  }
}

TEST_CASE("median at the marginal-implied value gives zero cross scale") {
  VineState st(2);
  st.set_marginal(0, 0.0, 1.0);
  st.set_marginal(1, -1.0, 2.0);
  st.open_level(1, 0.8);
  st.record_conditional_median(1, kLogit.inverse(-1.0), kLogit);
  CHECK(st.V()(0, 1) == doctest::Approx(0.0).scale(1.0));
  CHECK(st.rho()(0, 1) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("level-one feasible bounds have a closed form") {
  VineState st(2);
  const double m0 = 0.1, v0 = 0.5, m1 = -0.6, v1 = 1.8, eta = 0.9;
  st.set_marginal(0, m0, v0);
  st.set_marginal(1, m1, v1);
  st.open_level(1, eta);
  const double half = std::sqrt(v1 / v0) * (eta - m0);
  const Interval iv = st.feasible_eta_bounds(1);
  CHECK(iv.lo == doctest::Approx(m1 - half).epsilon(1e-5));
  CHECK(iv.hi == doctest::Approx(m1 + half).epsilon(1e-5));
  CHECK(iv.lo > m1 - half);
  CHECK(iv.hi < m1 + half);
  const Interval mu = st.feasible_median_bounds(1, kLogit);
  CHECK(mu.lo == doctest::Approx(kLogit.inverse(iv.lo)).epsilon(1e-12));
}

TEST_CASE("median outside the feasible bounds is a check violation") {
  VineState st(2);
  st.set_marginal(0, 0.0, 1.0);
  st.set_marginal(1, 0.0, 1.0);
  st.open_level(1, 1.0);
  const double edge = kIdentity.inverse(1.0);  // rho = 1 puts the median at 1
  try {
    st.record_conditional_median(1, edge, kIdentity);
    FAIL("boundary median accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::check_violation);
    REQUIRE(e.admissible().has_value());
    CHECK(e.admissible()->lo == doctest::Approx(-1.0).epsilon(1e-5));
    CHECK(e.admissible()->hi == doctest::Approx(1.0).epsilon(1e-5));
  }
  CHECK_FALSE(st.rho_set(0, 1));
  CHECK_NOTHROW(st.record_conditional_median(1, 0.999, kIdentity));
  CHECK(st.rho()(0, 1) == doctest::Approx(0.999));
}

TEST_CASE("feasible bounds match a grid search over the free partial correlation") {
  std::mt19937_64 g(77);
  const PrecisionPrior prior = PrecisionPrior::gamma(9.0, 9.0);
  const Eigen::MatrixXd Vs = oracle::random_spd(3, g);
  const Eigen::VectorXd ms = oracle::random_location(3, g);
  VineState st = oracle::run_vine(ms, Vs, kIdentity, prior);
  // Rebuild up to the point where level 2 is open but (1, 2) is not elicited.
  VineState partial(3);
  for (int i = 0; i < 3; ++i) partial.set_marginal(i, st.m()(i), st.V()(i, i));
  partial.open_level(1, st.eta_hat()(0));
  partial.record_conditional_median(1, st.medians()(0, 1), kIdentity);
  partial.record_conditional_median(2, st.medians()(0, 2), kIdentity);
  partial.open_level(2, st.eta_hat()(1));
  const Interval iv = partial.feasible_median_bounds(2, kIdentity);

  const Eigen::VectorXd sd = partial.V().diagonal().cwiseSqrt();
  double lo = INFINITY, hi = -INFINITY;
  for (int i = 0; i <= 2000; ++i) {
    Eigen::MatrixXd rho = partial.rho();
    rho.diagonal().setOnes();
    rho(1, 2) = -0.999 + 1.998 * i / 2000.0;
    const Eigen::MatrixXd V = sd.asDiagonal() * pcorr_to_corr(rho) * sd.asDiagonal();
    const double c = oracle::oracle_median(partial.m(), V, partial.eta_hat(), 2, 2, kIdentity);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  // The grid stops at |rho| = 0.999, the exact bounds at 1 - 1e-6.
  const double width = hi - lo;
  CHECK(iv.lo <= lo);
  CHECK(iv.hi >= hi);
  CHECK(iv.lo == doctest::Approx(lo).epsilon(0.05 * width / std::abs(lo) + 1e-12));
  CHECK(iv.hi == doctest::Approx(hi).epsilon(0.05 * width / std::abs(hi) + 1e-12));
  CHECK(st.medians()(1, 2) > iv.lo);
  CHECK(st.medians()(1, 2) < iv.hi);
}

TEST_CASE("accepted medians lie inside their bounds and feedback medians match") {
  std::mt19937_64 g(5);
  const PrecisionPrior prior = PrecisionPrior::gamma(14.3, 118.0);
  const int n = 5;
  const Eigen::MatrixXd V = oracle::random_spd(n, g);
  const Eigen::VectorXd m = oracle::random_location(n, g);
  VineState st(n);
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = oracle::marginal_interval(m(i), V(i, i), 0.5, kLogit, prior);
    const auto [mi, vi] = elicit_marginal({i, a, b, 0.5}, kLogit, prior);
    st.set_marginal(i, mi, vi);
  }
  for (int level = 1; level < n; ++level) {
    const double mu = propose_conditioning_value(st, level, 0.5, ConditioningSide::lower,
                                                 ConditioningMode::unit_dispersion, kLogit, prior);
    st.open_level(level, kLogit.forward(mu));
    for (int k = level; k < n; ++k) {
      const double c = oracle::oracle_median(m, V, st.eta_hat(), level, k, kLogit);
      const Interval iv = st.feasible_median_bounds(k, kLogit);
      CHECK(c > iv.lo);
      CHECK(c < iv.hi);
      st.record_conditional_median(k, c, kLogit);
      const CurveBundle cb = conditional_feedback(st, k, level, kLogit, prior, {0.5});
      CHECK(cb.quantiles[0] == doctest::Approx(c).epsilon(1e-12));
    }
  }
}

TEST_CASE("conditioning proposals") {
  const PrecisionPrior prior = PrecisionPrior::gamma(4.0, 12.0);  // r/s = 3
  VineState st(2);
  st.set_marginal(0, -0.5, 0.8);
  st.set_marginal(1, 0.0, 1.0);
  const auto [a, b] = oracle::marginal_interval(-0.5, 0.8, 0.5, kLogit, prior);
  const double up = propose_conditioning_value(st, 1, 0.5, ConditioningSide::upper,
                                               ConditioningMode::elicited_dispersion, kLogit, prior);
  const double lo = propose_conditioning_value(st, 1, 0.5, ConditioningSide::lower,
                                               ConditioningMode::elicited_dispersion, kLogit, prior);
  CHECK(up == doctest::Approx(b).epsilon(1e-12));
  CHECK(lo == doctest::Approx(a).epsilon(1e-12));
  CHECK(kLogit.forward(up) + 0.5 == doctest::Approx(-0.5 - kLogit.forward(lo)).epsilon(1e-10));
  const double unit = propose_conditioning_value(st, 1, 0.5, ConditioningSide::upper,
                                                 ConditioningMode::unit_dispersion, kLogit, prior);
  CHECK(kLogit.forward(unit) + 0.5 ==
        doctest::Approx(std::sqrt(0.8) * normal_quantile(0.75)).epsilon(1e-12));
  CHECK(kLogit.forward(unit) < kLogit.forward(up));
}

TEST_CASE("partial correlations map to a correlation matrix") {
  CHECK(pcorr_to_corr(Eigen::MatrixXd::Identity(4, 4)).isIdentity(1e-15));
  Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(3, 3);
  rho(0, 1) = 0.5;
  rho(0, 2) = 0.5;
  rho(1, 2) = 0.2;
  const Eigen::MatrixXd R = pcorr_to_corr(rho);
  CHECK(R(1, 2) == doctest::Approx(0.40).epsilon(1e-14));
  CHECK(R(2, 1) == doctest::Approx(0.40).epsilon(1e-14));
  rho(1, 2) = 1.0;
  CHECK_THROWS_AS(pcorr_to_corr(rho), Error);
}

TEST_CASE("random partial correlations round trip") {
  std::mt19937_64 g(6);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd rho = random_pcorr(6, g);
    const Eigen::MatrixXd R = pcorr_to_corr(rho);
    CHECK(is_spd(R));
    CHECK((R - R.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int l = 0; l < 6; ++l) {
      CHECK(R(l, l) == doctest::Approx(1.0).epsilon(1e-14));
      for (int k = l + 1; k < 6; ++k) {
        CHECK(pcorr_oracle(R, l, k) == doctest::Approx(rho(l, k)).epsilon(1e-10).scale(1.0));
        CHECK(partial_correlation(R, l, k) == doctest::Approx(rho(l, k)).epsilon(1e-10).scale(1.0));
      }
    }
  }
}

TEST_CASE("partial correlation mapping is always SPD") {
  std::mt19937_64 g(1000);
  int spd = 0;
  for (int rep = 0; rep < 1000; ++rep) spd += is_spd(pcorr_to_corr(random_pcorr(2 + rep % 7, g, 0.999)));
  CHECK(spd == 1000);
}

TEST_CASE("truncation keeps the diagonal and nests") {
  std::mt19937_64 g(12);
  const PrecisionPrior prior = PrecisionPrior::gamma(14.3, 118.0);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 3 + rep % 4;
    const VineState st =
        oracle::run_vine(oracle::random_location(n, g), oracle::random_spd(n, g), kLogit, prior);
    const auto [V0, R0] = st.truncate(0);
    CHECK(R0.isIdentity(1e-15));
    CHECK((V0 - Eigen::MatrixXd(st.V().diagonal().asDiagonal())).norm() == 0.0);
    const auto [Vf, Rf] = st.truncate(n - 1);
    CHECK((Vf - st.V()).cwiseAbs().maxCoeff() < 1e-12);
    double prev = INFINITY;
    for (int t = 0; t < n; ++t) {
      const auto [Vt, Rt] = st.truncate(t);
      CHECK((Vt.diagonal() - st.V().diagonal()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(is_spd(Vt));
      const double d = truncation_divergence(st.correlation(), Rt);
      CHECK(d >= -1e-12);
      CHECK(d <= prev + 1e-12);
      prev = d;
    }
    CHECK(prev == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("truncation beyond completed levels is rejected") {
  VineState st(3);
  for (int i = 0; i < 3; ++i) st.set_marginal(i, 0.0, 1.0);
  st.open_level(1, 0.5);
  st.record_conditional_median(1, 0.2, kIdentity);
  CHECK_THROWS_AS(st.truncate(1), Error);
  st.record_conditional_median(2, 0.1, kIdentity);
  CHECK_NOTHROW(st.truncate(1));
  CHECK_THROWS_AS(st.truncate(2), Error);
}

TEST_CASE("unset entries are tracked") {
  VineState st(3);
  CHECK_FALSE(st.marginal_set(0));
  st.set_marginal(0, 0.0, 1.0);
  CHECK(st.v_set(0, 0));
  CHECK_FALSE(st.v_set(0, 1));
  CHECK(std::isnan(st.medians()(0, 1)));
  CHECK_THROWS_AS(st.open_level(1, 0.5), Error);  // marginals incomplete
}

TEST_CASE("conditioning value equal to the conditional location is rejected") {
  VineState st(2);
  st.set_marginal(0, 0.3, 1.0);
  st.set_marginal(1, 0.0, 1.0);
  CHECK_THROWS_AS(st.open_level(1, 0.3), Error);
}
