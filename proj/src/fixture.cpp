#include "elicit/fixture.hpp"

#include <cmath>

namespace elicit {

ScenarioSet seagrass_scenarios() {
  ScenarioSet sc;
  sc.U.resize(7, 2);
  sc.U << 0.0001, 0.1,
          0.05,   0.1,
          0.5,    0.1,
          0.0001, 12.25,
          0.0001, 50.0,
          0.05,   50.0,
          0.5,    50.0;
  sc.names = {"DIN", "TSS"};
  sc.link = Link(LinkKind::logit);
  sc.families = {Family::simplex()};
  for (int i = 0; i < 7; ++i) {
    sc.descriptions.push_back("annual mean seagrass intersection probability, DIN " +
                              json(sc.U(i, 0)).dump() + " mg/L, TSS " +
                              json(sc.U(i, 1)).dump() + " mg/L");
  }
  sc.validate();
  return sc;
}

DesignMatrix seagrass_design(const ScenarioSet& sc) {
  Eigen::MatrixXd X(sc.U.rows(), 7);
  for (Eigen::Index i = 0; i < sc.U.rows(); ++i) {
    const double d = std::log10(sc.U(i, 0));
    const double t = sc.U(i, 1);
    X.row(i) << 1.0, d, t, d * t, d * d, t * t, d * d * t * t;
  }
  return DesignMatrix(X, {"intercept", "log10DIN", "TSS", "log10DIN:TSS",
                          "log10DIN^2", "TSS^2", "log10DIN^2:TSS^2"});
}

namespace {

// Synthetic systematic component: medians concave in DIN at low TSS and
// suppressed by TSS, with exponentially decaying correlation in the
// standardised covariate space.
struct SyntheticExpert {
  Eigen::VectorXd median;
  double half_width;  // logit half-width of the 1/3 interval
  Eigen::MatrixXd R;
};

SyntheticExpert synthetic_expert(const ScenarioSet& sc) {
  SyntheticExpert ex;
  ex.median.resize(7);
  ex.median << 0.15, 0.40, 0.15, 0.08, 0.03, 0.06, 0.03;
  ex.half_width = 0.4;
  const Eigen::Index n = sc.U.rows();
  Eigen::MatrixXd z(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    z(i, 0) = std::log10(sc.U(i, 0)) / 4.0;
    z(i, 1) = sc.U(i, 1) / 50.0;
  }
  ex.R.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      ex.R(i, j) = std::exp(-(z.row(i) - z.row(j)).norm() / 0.75);
  return ex;
}

EventRequest event(std::string op, json inputs, bool synthetic) {
  EventRequest r;
  r.op = std::move(op);
  r.inputs = std::move(inputs);
  r.synthetic = synthetic;
  return r;
}

}  // namespace

SeagrassFixture seagrass_fixture() {
  ScenarioSet sc = seagrass_scenarios();
  DesignMatrix X = seagrass_design(sc);
  Session session(kSeagrassSeed);
  const Link link = sc.link;
  const Family simplex = Family::simplex();

  SessionConfig cfg;
  cfg.scenarios = sc;
  cfg.family = simplex;
  session.apply(event("setup", cfg.to_json(), false));

  // Random component: the published final (s, r) with the two sample-mean
  // settings the discrepancies were reported for. The interval endpoints
  // are not published; they are generated from (s, r).
  for (double mu0 : {0.10, 0.01}) {
    const auto [d1, d2] = forward_dispersion_quantiles(kSeagrassS, kSeagrassR, mu0,
                                                       kSeagrassW, simplex);
    session.apply(event("assess_dispersion",
                        {{"mu0", mu0}, {"w", kSeagrassW}, {"d1", d1}, {"d2", d2},
                         {"accept", false}},
                        true));
  }
  session.apply(event("set_dispersion",
                      {{"s", kSeagrassS}, {"r", kSeagrassR}, {"mu0", 0.01},
                       {"w", kSeagrassW}},
                      false));

  // Systematic component (synthetic).
  const SyntheticExpert ex = synthetic_expert(sc);
  const double alpha = 1.0 / 3.0;
  for (int i = 0; i < 7; ++i) {
    const double m = link.forward(ex.median(i));
    session.apply(event("assess_marginal",
                        {{"a", link.inverse(m - ex.half_width)},
                         {"b", link.inverse(m + ex.half_width)},
                         {"alpha", alpha}},
                        true));
  }
  const Eigen::VectorXd m = session.vine().m();
  const Eigen::VectorXd sd = session.vine().V().diagonal().cwiseSqrt();
  const Eigen::MatrixXd V = sd.asDiagonal() * ex.R * sd.asDiagonal();
  for (int level = 1; level < 7; ++level) {
    session.apply(event("choose_conditioning",
                        {{"mode", "systematic"}, {"dispersion", "unit"}}, true));
    const Eigen::VectorXd eta = session.vine().eta_hat().head(level);
    const Eigen::MatrixXd block = V.topLeftCorner(level, level);
    const Eigen::VectorXd h = block.llt().solve(eta - m.head(level));
    for (int k = level; k < 7; ++k) {
      const double cond = m(k) + V.row(k).head(level).dot(h);
      session.apply(event("assess_conditional_median",
                          {{"k", k}, {"c", link.inverse(cond)}}, true));
    }
  }
  session.apply(event("induce",
                      {{"X", to_json(X.X)}, {"names", X.names}}, true));
  return {std::move(sc), std::move(X), std::move(session)};
}

}  // namespace elicit
