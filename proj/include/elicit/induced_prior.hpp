#pragma once

// Projection of the elicited saturated model (m, V, s, r) onto a design
// matrix X and observation family, and divergences between normal-gamma
// models.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elicit/dispersion.hpp"
#include "elicit/families.hpp"
#include "elicit/kernels.hpp"
#include "elicit/vine.hpp"

namespace elicit {

/// log sqrt(10): divergences above it count as substantial evidence against
/// the truncated model.
inline const double kTruncationThreshold = 0.5 * std::log(10.0);

struct DesignMatrix {
  Eigen::MatrixXd X;
  std::vector<std::string> names;
  Eigen::VectorXd offset;

  /// Validates column names and full column rank (tolerance 1e-10).
  DesignMatrix(Eigen::MatrixXd X, std::vector<std::string> names = {},
               Eigen::VectorXd offset = {});
  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
  static DesignMatrix identity(Eigen::Index n);
};

struct InducedPrior {
  Eigen::VectorXd delta;
  Eigen::MatrixXd sigma;
  PrecisionPrior prior = PrecisionPrior::known(1.0);  // (s-hat, r-hat) or phi'
  Eigen::MatrixXd A;
  double q = 1.0;
};

struct InduceOptions {
  Family elicited = Family::normal();
  Family target = Family::normal();
  /// Overrides the mu0 recorded in the dispersion spec.
  std::optional<double> mu0;
  /// phi' for the target family when dispersion is known.
  std::optional<double> target_phi;
};

InducedPrior induce_prior(const Eigen::VectorXd& m, const Eigen::MatrixXd& V,
                          const DispersionSpec& spec, const DesignMatrix& X,
                          const InduceOptions& options);

/// KL divergence from N(gamma, S/lambda) to N(gamma', S'/lambda).
double kl_normal(const Eigen::VectorXd& gamma, const Eigen::MatrixXd& S,
                 const Eigen::VectorXd& gamma_p, const Eigen::MatrixXd& S_p,
                 double lambda);

/// D(H : H') for the saturated model and a fitted alternative; needs p = n
/// so both scale matrices are nonsingular.
double induced_divergence(const Eigen::VectorXd& m, const Eigen::MatrixXd& V,
                          const DispersionSpec& spec, const DesignMatrix& X,
                          const InducedPrior& fitted);

/// 1/2 log(|R_t|/|R|) + 1/2 Tr[R R_t^-1] - n/2.
double truncation_divergence(const Eigen::MatrixXd& R,
                             const Eigen::MatrixXd& R_t);

/// Monte Carlo estimate of the same divergence from (lambda, eta) draws
/// under the full model.
struct McEstimate {
  double estimate;
  double stderr_;
};
McEstimate truncation_divergence_mc(const Eigen::VectorXd& m,
                                    const Eigen::MatrixXd& V,
                                    const Eigen::MatrixXd& V_t,
                                    const PrecisionPrior& prior, std::size_t n,
                                    std::uint64_t seed,
                                    kernels::Backend backend = kernels::Backend::omp);

struct TruncationPoint {
  int t;
  double divergence;
  bool substantial;
};

/// Divergence of every truncation t = 0..completed levels from the complete
/// vine.
std::vector<TruncationPoint> truncation_scan(const VineState& state);

}  // namespace elicit
