#include "elicit/induced_prior.hpp"

#include <cmath>
#include <set>

#include "elicit/error.hpp"

namespace elicit {

namespace {

Eigen::LLT<Eigen::MatrixXd> spd(const Eigen::MatrixXd& a, const char* what) {
  require(a.rows() == a.cols(), std::string(what) + ": matrix must be square");
  require(a.isApprox(a.transpose(), 1e-10),
          std::string(what) + ": matrix must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::domain, std::string(what) + ": matrix must be positive definite");
  }
  return llt;
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

DesignMatrix::DesignMatrix(Eigen::MatrixXd x, std::vector<std::string> n,
                           Eigen::VectorXd o)
    : X(std::move(x)), names(std::move(n)), offset(std::move(o)) {
  require(X.rows() >= 1 && X.cols() >= 1, "design matrix: empty");
  require(X.cols() <= X.rows(), "design matrix: more columns than rows");
  require(X.allFinite(), "design matrix: non-finite entries");
  if (names.empty()) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      names.push_back("beta" + std::to_string(j));
    }
  }
  require(static_cast<Eigen::Index>(names.size()) == X.cols(),
          "design matrix: one name per column");
  require(std::set<std::string>(names.begin(), names.end()).size() ==
              names.size(),
          "design matrix: column names must be unique");
  if (offset.size() == 0) offset = Eigen::VectorXd::Zero(X.rows());
  require(offset.size() == X.rows(), "design matrix: offset length");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  require(qr.rank() == X.cols(), "design matrix: not of full column rank");
}

DesignMatrix DesignMatrix::identity(Eigen::Index n) {
  return DesignMatrix(Eigen::MatrixXd::Identity(n, n));
}

InducedPrior induce_prior(const Eigen::VectorXd& m, const Eigen::MatrixXd& V,
                          const DispersionSpec& spec, const DesignMatrix& dm,
                          const InduceOptions& options) {
  const Eigen::MatrixXd& X = dm.X;
  require(m.size() == X.rows() && V.rows() == X.rows(),
          "induce: m, V and X must share the scenario dimension");
  const auto v_llt = spd(V, "induce: V");
  const Eigen::MatrixXd vinv_x = v_llt.solve(X);
  const Eigen::MatrixXd M = X.transpose() * vinv_x;
  const auto m_llt = spd(0.5 * (M + M.transpose()), "induce: X'V^-1X");

  InducedPrior out;
  const bool same = options.elicited == options.target;
  if (spec.is_known()) {
    const double phi = spec.prior.phi();
    double phi_p = phi;
    if (options.target_phi) {
      require(*options.target_phi > 0, "induce: phi' must be positive");
      phi_p = *options.target_phi;
    } else {
      require(same, "induce: known dispersion needs phi' for a new family");
    }
    out.q = phi_p / phi;
    out.prior = PrecisionPrior::known(phi_p);
  } else {
    if (same) {
      out.q = 1.0;
    } else {
      const std::optional<double> mu0 = options.mu0 ? options.mu0 : spec.mu0;
      require(mu0.has_value(), "induce: mu0 required to change family");
      out.q = options.elicited.variance(*mu0) / options.target.variance(*mu0);
    }
    out.prior = PrecisionPrior::gamma(spec.s(), spec.r() * out.q);
  }
  const Eigen::MatrixXd m_inv =
      m_llt.solve(Eigen::MatrixXd::Identity(X.cols(), X.cols()));
  // A known offset shifts the linear predictor: eta = X beta + o.
  const Eigen::VectorXd target = m - dm.offset;
  out.delta = m_llt.solve(vinv_x.transpose() * target);
  out.sigma = m_inv / out.q;
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  out.A = X * m_llt.solve(vinv_x.transpose());
  return out;
}

double kl_normal(const Eigen::VectorXd& gamma, const Eigen::MatrixXd& S,
                 const Eigen::VectorXd& gamma_p, const Eigen::MatrixXd& S_p,
                 double lambda) {
  require(gamma.size() == S.rows() && gamma_p.size() == S_p.rows() &&
              S.rows() == S_p.rows(),
          "kl_normal: dimension mismatch");
  require(lambda > 0, "kl_normal: lambda must be positive");
  const auto s_llt = spd(S, "kl_normal: S");
  const auto sp_llt = spd(S_p, "kl_normal: S'");
  const double n = static_cast<double>(S.rows());
  const Eigen::VectorXd diff = gamma - gamma_p;
  const double trace = sp_llt.solve(S).trace();
  return 0.5 * (log_det(sp_llt) - log_det(s_llt)) + 0.5 * (trace - n) +
         0.5 * lambda * diff.dot(sp_llt.solve(diff));
}

double induced_divergence(const Eigen::VectorXd& m, const Eigen::MatrixXd& V,
                          const DispersionSpec& spec, const DesignMatrix& X,
                          const InducedPrior& fitted) {
  require(X.rows() == X.cols(),
          "induced divergence: needs a square design matrix");
  const double ratio = spec.prior.ratio();
  const double ratio_p = fitted.prior.ratio();
  const Eigen::VectorXd gamma = fitted.A * m;
  const Eigen::VectorXd gamma_p = X.X * fitted.delta;
  Eigen::MatrixXd S = ratio * fitted.A * V * fitted.A.transpose();
  Eigen::MatrixXd S_p = ratio_p * X.X * fitted.sigma * X.X.transpose();
  S = 0.5 * (S + S.transpose()).eval();
  S_p = 0.5 * (S_p + S_p.transpose()).eval();
  // lambda has unit mean after the r/s rescaling, so the location term is
  // taken at lambda = 1.
  double d = kl_normal(gamma, S, gamma_p, S_p, 1.0);
  if (!spec.is_known()) {
    const double s = spec.s();
    const double s_p = fitted.prior.shape();
    d += gamma_kl(0.5 * s, 0.5 * s, 0.5 * s_p, 0.5 * s_p);
  }
  return d;
}

double truncation_divergence(const Eigen::MatrixXd& R,
                             const Eigen::MatrixXd& R_t) {
  require(R.rows() == R_t.rows(), "truncation divergence: dimension mismatch");
  // No truncation: same law, and the log-det and trace terms would only add rounding.
  if (R == R_t) return 0.0;
  const auto r_llt = spd(R, "truncation divergence: R");
  const auto rt_llt = spd(R_t, "truncation divergence: R(t)");
  const double n = static_cast<double>(R.rows());
  return 0.5 * (log_det(rt_llt) - log_det(r_llt)) +
         0.5 * rt_llt.solve(R).trace() - 0.5 * n;
}

McEstimate truncation_divergence_mc(const Eigen::VectorXd& m,
                                    const Eigen::MatrixXd& V,
                                    const Eigen::MatrixXd& V_t,
                                    const PrecisionPrior& prior, std::size_t n,
                                    std::uint64_t seed,
                                    kernels::Backend backend) {
  require(n >= 2, "truncation MC: need at least two draws");
  const auto v_llt = spd(V, "truncation MC: V");
  const auto vt_llt = spd(V_t, "truncation MC: V(t)");
  const Eigen::MatrixXd L = v_llt.matrixL();
  const double half_log_ratio = 0.5 * (log_det(vt_llt) - log_det(v_llt));
  const Eigen::Index dim = m.size();
  const std::vector<double> terms = kernels::draw_scalars(
      [&](RandomSource& rng) {
        const double lambda =
            prior.is_known() ? 1.0 / prior.phi()
                             : rng.gamma(0.5 * prior.shape(), 0.5 * prior.rate());
        Eigen::VectorXd z(dim);
        for (Eigen::Index i = 0; i < dim; ++i) z(i) = rng.normal();
        const Eigen::VectorXd e = L * z / std::sqrt(lambda);
        const double q_full = z.squaredNorm() / lambda;
        const double q_trunc = e.dot(vt_llt.solve(e));
        return half_log_ratio - 0.5 * lambda * (q_full - q_trunc);
      },
      n, seed, backend);
  double mean = 0.0;
  for (double t : terms) mean += t;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double t : terms) ss += (t - mean) * (t - mean);
  return {mean, std::sqrt(ss) / static_cast<double>(n)};
}

std::vector<TruncationPoint> truncation_scan(const VineState& state) {
  const int done = state.completed_levels();
  require(done == state.n() - 1, "truncation scan: vine incomplete",
          ErrorKind::illegal_transition);
  const Eigen::MatrixXd R = state.correlation();
  std::vector<TruncationPoint> out;
  for (int t = 0; t <= done; ++t) {
    const double d = truncation_divergence(R, state.truncate(t).second);
    out.push_back({t, d, d > kTruncationThreshold});
  }
  return out;
}

}  // namespace elicit
