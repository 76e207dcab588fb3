#include "elicit/vine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "elicit/special.hpp"

namespace elicit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::LLT<Eigen::MatrixXd> guarded_llt(const Eigen::MatrixXd& block,
                                        const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(block);
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::numerical, std::string(what) + ": block not positive definite");
  }
  if (llt.rcond() < VineState::kMinRcond) {
    fail(ErrorKind::numerical,
         std::string(what) + ": conditioning block numerically singular");
  }
  return llt;
}

Interval sorted(double a, double b) { return a < b ? Interval{a, b} : Interval{b, a}; }

}  // namespace

std::pair<double, double> elicit_marginal(const MarginalAssessment& assessment,
                                          const Link& link,
                                          const PrecisionPrior& prior) {
  const auto& [i, a, b, alpha] = assessment;
  (void)i;
  require(alpha > 0 && alpha < 1, "marginal: alpha must lie in (0, 1)");
  const MeanDomain dom = link.domain();
  require(dom.interior(a) && dom.interior(b),
          "marginal: interval endpoints must lie inside the mean domain");
  require(a < b, "marginal: need a < b");
  const double ga = link.forward(a);
  const double gb = link.forward(b);
  const double m = 0.5 * (ga + gb);
  const double z = student_t_quantile(0.5 * (1.0 + alpha), prior.shape());
  const double half = (gb - m) / z;
  const double v = half * half / prior.ratio();
  require(v > 0 && std::isfinite(v), "marginal: zero or non-finite scale");
  return {m, v};
}

VineState::VineState(int n)
    : n_(n),
      m_(Eigen::VectorXd::Constant(n, kNaN)),
      v_(Eigen::MatrixXd::Constant(n, n, kNaN)),
      v_mask_(Eigen::MatrixXi::Zero(n, n)),
      rho_(Eigen::MatrixXd::Identity(n, n)),
      rho_mask_(Eigen::MatrixXi::Zero(n, n)),
      c_(Eigen::MatrixXd::Constant(n, n, kNaN)),
      eta_hat_(Eigen::VectorXd::Constant(n, kNaN)),
      cond_scale_(Eigen::MatrixXd::Constant(n, n, kNaN)),
      marginal_set_(static_cast<std::size_t>(n), false) {
  require(n >= 1, "vine: need at least one scenario");
}

bool VineState::marginals_complete() const {
  return std::all_of(marginal_set_.begin(), marginal_set_.end(),
                     [](bool b) { return b; });
}

bool VineState::level_complete(int level) const {
  if (level == 0) return marginals_complete();
  if (level < 0 || level >= n_ || level > open_level_) return false;
  for (int k = level; k < n_; ++k) {
    if (!v_set(k, level - 1)) return false;
  }
  return true;
}

int VineState::completed_levels() const {
  if (!marginals_complete()) return -1;
  int done = 0;
  while (done + 1 < n_ && level_complete(done + 1)) ++done;
  return done;
}

void VineState::set_marginal(int i, double m_i, double v_ii) {
  require(i >= 0 && i < n_, "vine: scenario index out of range");
  require(open_level_ == 0,
          "vine: marginals are committed once a tree level is open",
          ErrorKind::illegal_transition);
  require(std::isfinite(m_i) && v_ii > 0 && std::isfinite(v_ii),
          "vine: marginal location and scale must be finite, scale positive");
  m_(i) = m_i;
  v_(i, i) = v_ii;
  v_mask_(i, i) = 1;
  cond_scale_(i, 0) = v_ii;
  c_(i, i) = kNaN;
  marginal_set_[static_cast<std::size_t>(i)] = true;
}

void VineState::require_block(int level) const {
  for (int a = 0; a < level; ++a) {
    for (int b = 0; b < level; ++b) {
      require(v_set(std::max(a, b), std::min(a, b)),
              "vine: conditioning block has unset entries",
              ErrorKind::illegal_transition);
    }
  }
}

void VineState::open_level(int level, double eta_hat) {
  require(level == open_level_ + 1 && level <= n_ - 1,
          "vine: levels must be opened in order", ErrorKind::illegal_transition);
  require(level_complete(level - 1), "vine: previous level incomplete",
          ErrorKind::illegal_transition);
  require(std::isfinite(eta_hat), "vine: conditioning value must be finite");
  const int j = level - 1;
  // Placeholder prior: only location and scale are used here.
  const ConditionalT prev = conditional(j, j, PrecisionPrior::known(1.0));
  require(std::abs(eta_hat - prev.location) > 1e-12 * std::sqrt(prev.scale),
          "vine: conditioning value must differ from its conditional median");
  eta_hat_(j) = eta_hat;
  open_level_ = level;
}

Eigen::VectorXd VineState::h(int level) const {
  require_block(level);
  const Eigen::MatrixXd block =
      v_.topLeftCorner(level, level).selfadjointView<Eigen::Lower>();
  const auto llt = guarded_llt(block, "vine");
  return llt.solve(eta_hat_.head(level) - m_.head(level));
}

ConditionalT VineState::conditional(int k, int level,
                                    const PrecisionPrior& prior) const {
  require(k >= 0 && k < n_ && marginal_set(k), "vine: marginal not set",
          ErrorKind::illegal_transition);
  require(level >= 0 && level <= k, "vine: need level <= k");
  if (level == 0) return {m_(k), v_(k, k), prior};
  require(level <= open_level_, "vine: level not open",
          ErrorKind::illegal_transition);
  for (int g = 0; g < level; ++g) {
    require(v_set(k, g), "vine: scale row not elicited at this level",
            ErrorKind::illegal_transition);
  }
  require_block(level);
  const Eigen::MatrixXd block =
      v_.topLeftCorner(level, level).selfadjointView<Eigen::Lower>();
  const auto llt = guarded_llt(block, "vine");
  const Eigen::VectorXd resid = eta_hat_.head(level) - m_.head(level);
  const Eigen::VectorXd hv = llt.solve(resid);
  const Eigen::VectorXd cross = v_.row(k).head(level).transpose();
  const double location = m_(k) + cross.dot(hv);
  const double scale = v_(k, k) - cross.dot(llt.solve(cross));
  const double zeta = resid.dot(hv);
  return {location, scale, prior.conditioned(zeta, level)};
}

Interval VineState::feasible_eta_bounds(int k) const {
  const int level = open_level_;
  require(level >= 1, "vine: no tree level open", ErrorKind::illegal_transition);
  require(k >= level && k < n_, "vine: target must satisfy k >= level");
  const int j = level - 1;
  for (int g = 0; g < j; ++g) {
    require(v_set(k, g), "vine: lower levels for this target incomplete",
            ErrorKind::illegal_transition);
  }
  const Eigen::VectorXd d = v_.diagonal().cwiseSqrt();
  const Eigen::VectorXd resid = eta_hat_.head(level) - m_.head(level);
  double ends[2];
  for (int side = 0; side < 2; ++side) {
    Eigen::MatrixXd p = rho_;
    p(j, k) = side == 0 ? -1.0 : 1.0;
    const Eigen::MatrixXd r = pcorr_to_corr_unchecked(p);
    const Eigen::MatrixXd v = d.asDiagonal() * r * d.asDiagonal();
    const auto llt = guarded_llt(v.topLeftCorner(level, level), "feasible bounds");
    ends[side] = m_(k) + v.row(k).head(level).dot(llt.solve(resid));
  }
  const double mid = 0.5 * (ends[0] + ends[1]);
  const double half = 0.5 * std::abs(ends[1] - ends[0]) * (1.0 - kFeasibleMargin);
  return {mid - half, mid + half};
}

Interval VineState::feasible_median_bounds(int k, const Link& link) const {
  const Interval eta = feasible_eta_bounds(k);
  return sorted(link.inverse(eta.lo), link.inverse(eta.hi));
}

void VineState::record_conditional_median(int k, double c, const Link& link) {
  const int level = open_level_;
  require(level >= 1, "vine: no tree level open", ErrorKind::illegal_transition);
  require(k >= level && k < n_, "vine: target must satisfy k >= level");
  require(link.domain().interior(c),
          "vine: conditional median outside the mean domain");
  const int j = level - 1;
  const Interval eta_ok = feasible_eta_bounds(k);
  const double e = link.forward(c);
  const auto reject = [&](const std::string& why) {
    throw Error(ErrorKind::check_violation,
                "vine: conditional median " + std::to_string(c) + " for " +
                    "scenario " + std::to_string(k) + " " + why,
                sorted(link.inverse(eta_ok.lo), link.inverse(eta_ok.hi)));
  };
  if (!(e >= eta_ok.lo && e <= eta_ok.hi)) reject("is outside the feasible bounds");

  const Eigen::VectorXd hv = h(level);
  double v_kj = (e - m_(k));
  for (int g = 0; g < j; ++g) v_kj -= v_(k, g) * hv(g);
  v_kj /= hv(j);

  const double saved = v_(k, j);
  const int saved_mask = v_mask_(k, j);
  v_(k, j) = v_(j, k) = v_kj;
  v_mask_(k, j) = v_mask_(j, k) = 1;
  const ConditionalT now = conditional(k, level, PrecisionPrior::known(1.0));
  const double before = cond_scale_(k, j);
  if (!(now.scale > 0 && now.scale <= before)) {
    v_(k, j) = v_(j, k) = saved;
    v_mask_(k, j) = v_mask_(j, k) = saved_mask;
    reject("fails the conditional scale check");
  }
  const Eigen::MatrixXd full = v_.selfadjointView<Eigen::Lower>();
  rho_(j, k) = partial_correlation(full.topLeftCorner(k + 1, k + 1), j, k);
  rho_mask_(j, k) = 1;
  c_(j, k) = c;
  cond_scale_(k, level) = now.scale;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> VineState::truncate(int t) const {
  require(t >= 0 && t <= n_ - 1, "truncate: level out of range");
  require(completed_levels() >= t, "truncate: levels up to t must be complete",
          ErrorKind::illegal_transition);
  Eigen::MatrixXd p = rho_;
  for (int i = t; i < n_; ++i) {
    for (int k = i + 1; k < n_; ++k) p(i, k) = 0.0;
  }
  const Eigen::MatrixXd r = pcorr_to_corr(p);
  const Eigen::VectorXd d = v_.diagonal().cwiseSqrt();
  Eigen::MatrixXd v = d.asDiagonal() * r * d.asDiagonal();
  v.diagonal() = v_.diagonal();
  return {v, r};
}

Eigen::MatrixXd VineState::correlation() const {
  require(completed_levels() == n_ - 1, "vine: dependence model incomplete",
          ErrorKind::illegal_transition);
  return pcorr_to_corr(rho_);
}

Eigen::MatrixXd pcorr_to_corr_unchecked(const Eigen::MatrixXd& p) {
  const auto n = p.rows();
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k < n; ++k) r(0, k) = r(k, 0) = p(0, k);
  for (Eigen::Index l = 1; l + 1 < n; ++l) {
    for (Eigen::Index k = l + 1; k < n; ++k) {
      double x = p(l, k);
      for (Eigen::Index g = l - 1; g >= 0; --g) {
        x = p(g, l) * p(g, k) +
            x * std::sqrt(1.0 - p(g, l) * p(g, l)) *
                std::sqrt(1.0 - p(g, k) * p(g, k));
      }
      r(l, k) = r(k, l) = x;
    }
  }
  return r;
}

Eigen::MatrixXd pcorr_to_corr(const Eigen::MatrixXd& p) {
  require(p.rows() == p.cols(), "pcorr_to_corr: matrix must be square");
  for (Eigen::Index l = 0; l < p.rows(); ++l) {
    for (Eigen::Index k = l + 1; k < p.cols(); ++k) {
      require(std::abs(p(l, k)) < 1.0,
              "pcorr_to_corr: partial correlations must lie in (-1, 1)");
    }
  }
  return pcorr_to_corr_unchecked(p);
}

double partial_correlation(const Eigen::MatrixXd& v, int l, int k) {
  require(l >= 0 && l < k && k < v.rows(), "partial correlation: need l < k");
  if (l == 0) return v(0, k) / std::sqrt(v(0, 0) * v(k, k));
  const Eigen::MatrixXd block = v.topLeftCorner(l, l);
  const auto llt = guarded_llt(block, "partial correlation");
  const Eigen::VectorXd bl = v.col(l).head(l);
  const Eigen::VectorXd bk = v.col(k).head(l);
  const double lk = v(l, k) - bl.dot(llt.solve(bk));
  const double ll = v(l, l) - bl.dot(llt.solve(bl));
  const double kk = v(k, k) - bk.dot(llt.solve(bk));
  return lk / std::sqrt(ll * kk);
}

CurveBundle curves_for(const GenT1& eta, const Link& link,
                       const std::vector<double>& probs, int grid_size) {
  require(grid_size >= 2, "feedback: grid needs at least two points");
  const double sgn = link.slope_sign();
  const auto quantile = [&](double q) {
    return link.inverse(eta.location +
                        eta.t_scale() * student_t_quantile(q, eta.prior.shape()) * sgn);
  };
  const auto cdf = [&](double z) {
    return student_t_cdf((link.forward(z) - eta.location) / eta.t_scale() * sgn,
                         eta.prior.shape());
  };
  CurveBundle out;
  out.median = link.inverse(eta.location);
  double prev = -std::numeric_limits<double>::infinity();
  for (double q : probs) {
    require(q > 0 && q < 1, "feedback: probabilities must lie in (0, 1)");
    require(q > prev, "feedback: probabilities must be increasing");
    prev = q;
    out.probs.push_back(q);
    out.quantiles.push_back(quantile(q));
  }
  // Grid points are equally spaced on the linear-predictor scale between the
  // 1e-5 and 1 - 1e-5 quantiles, so heavy mean-scale tails stay resolved.
  const MeanDomain dom = link.domain();
  const double lo_clip = std::isfinite(dom.lo) ? dom.lo + kDisplayEpsilon : -std::numeric_limits<double>::max();
  const double hi_clip = std::isfinite(dom.hi) ? dom.hi - kDisplayEpsilon : std::numeric_limits<double>::max();
  const Interval e_dom = sorted(link.forward(lo_clip), link.forward(hi_clip));
  const double e_lo = std::clamp(
      eta.location + eta.t_scale() * student_t_quantile(1e-5, eta.prior.shape()), e_dom.lo, e_dom.hi);
  const double e_hi = std::clamp(
      eta.location + eta.t_scale() * student_t_quantile(1.0 - 1e-5, eta.prior.shape()), e_dom.lo,
      e_dom.hi);
  out.grid.resize(static_cast<std::size_t>(grid_size));
  out.density.resize(out.grid.size());
  out.cdf.resize(out.grid.size());
  for (int i = 0; i < grid_size; ++i) {
    // For a negative slope the mean scale runs the other way.
    const double t = static_cast<double>(sgn > 0 ? i : grid_size - 1 - i) / (grid_size - 1);
    const double z = std::clamp(link.inverse(e_lo + (e_hi - e_lo) * t), lo_clip, hi_clip);
    const auto u = static_cast<std::size_t>(i);
    out.grid[u] = z;
    out.density[u] =
        eta.pdf(link.forward(z)) * std::abs(link.derivative(z));
    out.cdf[u] = cdf(z);
  }
  return out;
}

CurveBundle marginal_feedback(const VineState& state, int i, const Link& link,
                              const PrecisionPrior& prior,
                              const std::vector<double>& probs, int grid_size) {
  require(i >= 0 && i < state.n() && state.marginal_set(i),
          "feedback: marginal not set", ErrorKind::illegal_transition);
  return curves_for(GenT1(state.m()(i), state.V()(i, i), prior), link, probs,
                    grid_size);
}

CurveBundle conditional_feedback(const VineState& state, int k, int level,
                                 const Link& link, const PrecisionPrior& prior,
                                 const std::vector<double>& probs,
                                 int grid_size) {
  return curves_for(state.conditional(k, level, prior).eta(), link, probs,
                    grid_size);
}

double propose_conditioning_value(const VineState& state, int level,
                                  double alpha, ConditioningSide side,
                                  ConditioningMode mode, const Link& link,
                                  const PrecisionPrior& prior) {
  require(alpha > 0 && alpha < 1, "conditioning value: alpha must lie in (0, 1)");
  require(level >= 1 && level <= state.n() - 1,
          "conditioning value: level out of range");
  require(state.level_complete(level - 1),
          "conditioning value: previous level incomplete",
          ErrorKind::illegal_transition);
  const int j = level - 1;
  const ConditionalT cond = state.conditional(j, j, prior);
  const double q = 0.5 * (1.0 + alpha);
  const double half =
      mode == ConditioningMode::elicited_dispersion
          ? cond.eta().quantile(q) - cond.location
          : std::sqrt(cond.scale) * normal_quantile(q);
  require(half > 0 && std::isfinite(half),
          "conditioning value: degenerate interval");
  const Interval mu = sorted(link.inverse(cond.location - half),
                             link.inverse(cond.location + half));
  const double out = side == ConditioningSide::upper ? mu.hi : mu.lo;
  require(link.domain().interior(out),
          "conditioning value: interval bound reaches the domain boundary");
  return out;
}

}  // namespace elicit
