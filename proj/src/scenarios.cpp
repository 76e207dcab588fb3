#include "elicit/scenarios.hpp"

#include <set>

#include "elicit/error.hpp"

namespace elicit {

void ScenarioSet::validate() const {
  require(U.rows() >= 1, "scenarios: need at least one scenario");
  require(static_cast<Eigen::Index>(names.size()) == U.cols(),
          "scenarios: one name per covariate column");
  require(std::set<std::string>(names.begin(), names.end()).size() == names.size(),
          "scenarios: covariate names must be unique");
  require(descriptions.empty() ||
              static_cast<Eigen::Index>(descriptions.size()) == U.rows(),
          "scenarios: one description per scenario");
  require(!families.empty(), "scenarios: need at least one family");
  require(!known_phi || *known_phi > 0, "scenarios: known phi must be positive");
}

ScenarioSet build_multinomial_scenarios(const Eigen::MatrixXd& base,
                                        const std::vector<std::string>& names,
                                        int d, MultinomialCoding coding) {
  require(d >= 2, "multinomial: need d >= 2 categories");
  require(base.rows() >= 1, "multinomial: need at least one covariate row");
  require(static_cast<Eigen::Index>(names.size()) == base.cols(),
          "multinomial: one name per covariate column");
  ScenarioSet out;
  out.U.resize(base.rows() * d, base.cols() + 1);
  out.names = names;
  out.names.push_back("category");
  out.link = Link(LinkKind::log);
  out.families = {Family::poisson()};
  out.known_phi = 1.0;
  const std::string ref = std::to_string(d + 1);
  for (Eigen::Index j = 0; j < base.rows(); ++j) {
    for (int k = 1; k <= d; ++k) {
      const Eigen::Index row = j * d + (k - 1);
      out.U.row(row).head(base.cols()) = base.row(j);
      out.U(row, base.cols()) = k;
      const std::string jj = std::to_string(j + 1);
      const std::string kk = std::to_string(k);
      if (coding == MultinomialCoding::additive) {
        out.descriptions.push_back("p_{" + jj + "," + kk + "}/p_{" + jj + "," +
                                   ref + "}");
      } else {
        out.descriptions.push_back("p_{" + jj + "," + kk + "}/(1-sum_{k'<=" +
                                   kk + "} p_{" + jj + ",k'})");
      }
    }
  }
  out.validate();
  return out;
}

}  // namespace elicit
