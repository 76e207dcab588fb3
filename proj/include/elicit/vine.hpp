#pragma once

// Marginal elicitation of the linear predictor and the canonical-vine
// conditional-median machinery.
//
// Scenario indices are 0-based. Tree level L (1 <= L <= n-1) conditions on
// scenarios 0..L-1; its new conditioning scenario is j = L-1 and its targets
// are k = L..n-1. Level 0 is the set of marginals.

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "elicit/error.hpp"
#include "elicit/gen_t.hpp"
#include "elicit/link.hpp"

namespace elicit {

struct MarginalAssessment {
  int scenario;
  double a;
  double b;
  double alpha;
};

/// (m_i, V_ii) from a central interval (a, b) of probability alpha for mu_i.
std::pair<double, double> elicit_marginal(const MarginalAssessment& assessment,
                                          const Link& link,
                                          const PrecisionPrior& prior);

/// Conditional law of eta_k given the first `level` conditioning values.
struct ConditionalT {
  double location;  // m_{k|1:l}
  double scale;     // V_{k,k|1:l}
  PrecisionPrior prior;  // (r + zeta, s + l)

  GenT1 eta() const { return {location, scale, prior}; }
};

/// Density, cdf and quantiles of mu_i on a grid.
struct CurveBundle {
  std::vector<double> grid;
  std::vector<double> density;
  std::vector<double> cdf;
  std::vector<double> probs;
  std::vector<double> quantiles;
  double median;
};

enum class ConditioningSide { lower, upper };
enum class ConditioningMode { elicited_dispersion, unit_dispersion };

class VineState {
 public:
  explicit VineState(int n);

  int n() const { return n_; }
  const Eigen::VectorXd& m() const { return m_; }
  const Eigen::MatrixXd& V() const { return v_; }
  bool v_set(int i, int j) const { return v_mask_(i, j) != 0; }
  /// Upper-triangular partial correlations; unset entries are 0.
  const Eigen::MatrixXd& rho() const { return rho_; }
  bool rho_set(int l, int k) const { return rho_mask_(l, k) != 0; }
  /// Conditional medians C(j, k) on the mean scale; NaN when unset.
  const Eigen::MatrixXd& medians() const { return c_; }
  /// Conditioning values eta-hat; NaN when unset.
  const Eigen::VectorXd& eta_hat() const { return eta_hat_; }
  /// cond_scale(k, L) = V_{k,k|0:L}; NaN when unknown.
  const Eigen::MatrixXd& cond_scales() const { return cond_scale_; }

  bool marginal_set(int i) const { return marginal_set_[i]; }
  bool marginals_complete() const;
  /// Highest tree level whose conditioning value has been fixed (0 if none).
  int open_level() const { return open_level_; }
  bool level_complete(int level) const;
  /// Number of fully completed tree levels above the marginals.
  int completed_levels() const;

  void set_marginal(int i, double m_i, double v_ii);
  /// Fixes eta-hat for scenario level-1, opening `level`. Requires the
  /// previous level complete and eta-hat != m_{j|0:j}.
  void open_level(int level, double eta_hat);

  /// Conditional law of eta_k given scenarios 0..level-1 (level 0 gives the
  /// marginal).
  ConditionalT conditional(int k, int level, const PrecisionPrior& prior) const;

  /// Records c_{k|0:L} at the open level L, with L <= k. Fails with
  /// ErrorKind::check_violation and the admissible median interval when the
  /// conditional scale check fails.
  void record_conditional_median(int k, double c, const Link& link);

  /// Feasible conditional-median interval on the mean scale at the open
  /// level, shrunk by kFeasibleMargin.
  Interval feasible_median_bounds(int k, const Link& link) const;

  /// Same interval on the linear-predictor scale (before the link inverse).
  Interval feasible_eta_bounds(int k) const;

  /// V(t) and R(t) from partial correlations zeroed above level t.
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> truncate(int t) const;

  /// Full correlation matrix of the completed vine.
  Eigen::MatrixXd correlation() const;

  static constexpr double kFeasibleMargin = 1e-6;
  static constexpr double kMinRcond = 1e-12;

 private:
  /// h = V_{0:L,0:L}^{-1} (eta-hat_{0:L} - m_{0:L}).
  Eigen::VectorXd h(int level) const;
  void require_block(int level) const;

  int n_;
  Eigen::VectorXd m_;
  Eigen::MatrixXd v_;
  Eigen::MatrixXi v_mask_;
  Eigen::MatrixXd rho_;
  Eigen::MatrixXi rho_mask_;
  Eigen::MatrixXd c_;
  Eigen::VectorXd eta_hat_;
  Eigen::MatrixXd cond_scale_;
  std::vector<bool> marginal_set_;
  int open_level_ = 0;
};

/// Density, cdf and quantiles of mu_i under its marginal generalised t.
CurveBundle marginal_feedback(const VineState& state, int i, const Link& link,
                              const PrecisionPrior& prior,
                              const std::vector<double>& probs,
                              int grid_size = 201);

/// Same for the conditional law of mu_k given the first `level` values.
CurveBundle conditional_feedback(const VineState& state, int k, int level,
                                 const Link& link, const PrecisionPrior& prior,
                                 const std::vector<double>& probs,
                                 int grid_size = 201);

/// Curves for an eta-scale generalised t pushed through g^-1.
CurveBundle curves_for(const GenT1& eta, const Link& link,
                       const std::vector<double>& probs, int grid_size);

/// Algorithm S1: canonical-vine partial correlations to a correlation matrix.
/// Entries below the diagonal are ignored.
Eigen::MatrixXd pcorr_to_corr(const Eigen::MatrixXd& rho);
/// Same recursion without the |p| < 1 check; allows the +-1 extremes used
/// for feasible bounds.
Eigen::MatrixXd pcorr_to_corr_unchecked(const Eigen::MatrixXd& rho);

/// Partial correlation rho_{l,k|0:l-1} of a scale or correlation matrix.
double partial_correlation(const Eigen::MatrixXd& v, int l, int k);

/// Conditioning value mu-hat for scenario level-1: the chosen bound of the
/// central interval of probability alpha of its law given scenarios
/// 0..level-2.
double propose_conditioning_value(const VineState& state, int level,
                                  double alpha, ConditioningSide side,
                                  ConditioningMode mode, const Link& link,
                                  const PrecisionPrior& prior);

}  // namespace elicit
