#pragma once

// Elicitation scenarios U and the multinomial expansion of a covariate table
// into one scenario per (row, category).

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elicit/families.hpp"
#include "elicit/link.hpp"

namespace elicit {

struct ScenarioSet {
  Eigen::MatrixXd U;
  std::vector<std::string> names;
  Link link{LinkKind::identity};
  std::vector<Family> families;
  std::vector<std::string> descriptions;
  /// Known dispersion phi, when the random component is not elicited.
  std::optional<double> known_phi;

  /// Checks n >= 1, unique column names and matching description count.
  void validate() const;
  int n() const { return static_cast<int>(U.rows()); }
};

enum class MultinomialCoding { additive, sequential };

/// d scenarios per row of `base`, one per non-reference category, on the log
/// link with a Poisson target and known dispersion 1. The last column of U is
/// the category index k = 1..d.
ScenarioSet build_multinomial_scenarios(const Eigen::MatrixXd& base,
                                        const std::vector<std::string>& names,
                                        int d, MultinomialCoding coding);

}  // namespace elicit
