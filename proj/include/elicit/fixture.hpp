#pragma once

// Seagrass case study: the seven DIN/TSS elicitation scenarios, the
// polynomial design matrix and a recorded session transcript.

#include <string>

#include "elicit/induced_prior.hpp"
#include "elicit/scenarios.hpp"
#include "elicit/session.hpp"

namespace elicit {

inline constexpr std::uint64_t kSeagrassSeed = 20240501;
inline constexpr double kSeagrassS = 14.3;
inline constexpr double kSeagrassR = 118.0;
inline constexpr double kSeagrassW = 10.0;

struct SeagrassFixture {
  ScenarioSet scenarios;
  DesignMatrix design;
  /// Events with synthetic:false carry published quantities only (setup and
  /// the final s, r); all other inputs are synthesized and flagged.
  Session session;
};

ScenarioSet seagrass_scenarios();
/// Columns: intercept, log10 DIN, TSS, their product, the two squares and
/// the squared product.
DesignMatrix seagrass_design(const ScenarioSet& scenarios);

SeagrassFixture seagrass_fixture();

}  // namespace elicit
