#pragma once

// Event-sourced elicitation session. Every accepted event is appended to the
// session's event log; the state is a pure function of the seed and the log.
//
// Phases follow the elicitation order: Setup, RandomComponent (skipped for
// known dispersion), PowerParameter (compound Poisson without a fixed power),
// Marginals(i), VineLevel(l, k), Truncated(t), Concluded.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "elicit/canonical_json.hpp"
#include "elicit/diagnostics.hpp"
#include "elicit/dispersion.hpp"
#include "elicit/families.hpp"
#include "elicit/induced_prior.hpp"
#include "elicit/scenarios.hpp"
#include "elicit/vine.hpp"

namespace elicit {

enum class PhaseKind {
  setup,
  random_component,
  power_parameter,
  marginals,
  vine_level,
  truncated,
  concluded,
};

struct SessionPhase {
  PhaseKind kind = PhaseKind::setup;
  /// Scenario i for Marginals, tree level l for VineLevel, t for Truncated.
  int index = 0;
  /// Target scenario k at a vine level; empty while the level's conditioning
  /// value is still to be chosen.
  std::optional<int> target;

  std::string label() const;
  json to_json() const;
  bool operator==(const SessionPhase&) const = default;
};

struct SessionConfig {
  ScenarioSet scenarios;
  /// Member of the family set used during elicitation.
  Family family = Family::normal();
  double alpha1 = kDefaultAlpha1;
  double alpha2 = kDefaultAlpha2;
  /// Cdf levels reported as quantile feedback: the median and the 1/3 and
  /// 0.8 central intervals.
  std::vector<double> feedback_probs = {0.1, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.9};
  int grid_size = 201;

  json to_json() const;
  static SessionConfig from_json(const json& j);
};

struct EventRequest {
  std::string op;
  json inputs = json::object();
  /// Caller-chosen id; empty means "e<seq>". Ids are applied at most once.
  std::string id;
  std::string timestamp;
  bool synthetic = false;
};

struct EventRecord {
  int seq = 0;
  std::string id;
  std::string timestamp;
  std::string phase;  // phase the event was applied in
  std::string op;
  json inputs;
  bool accepted = true;
  json deltas;
  bool synthetic = false;

  json to_json() const;
  static EventRecord from_json(const json& j);
};

class Session {
 public:
  explicit Session(std::uint64_t seed);

  /// Applies one event. On error nothing is recorded and the state is
  /// unchanged; errors carry the phase in their message.
  EventRecord apply(const EventRequest& request);

  std::uint64_t seed() const { return seed_; }
  const SessionPhase& phase() const { return state_.phase; }
  const std::vector<EventRecord>& events() const { return events_; }
  bool has_event(const std::string& id) const { return ids_.count(id) != 0; }

  /// Requires a completed setup event.
  const SessionConfig& config() const;
  const Family& family() const { return state_.family; }
  const DispersionSpec& dispersion() const { return state_.dispersion; }
  const VineState& vine() const;
  Link link() const;

  /// Location and scale of the linear predictor after truncation or
  /// conclusion; fails in earlier phases.
  Eigen::VectorXd final_location() const;
  Eigen::MatrixXd final_scale() const;
  Eigen::MatrixXd final_correlation() const;
  const std::optional<InducedPrior>& last_induced() const {
    return state_.induced;
  }

  json snapshot() const;
  /// Feedback for the pending assessment of the current phase.
  json feedback() const;
  json feedback(int grid_size, const std::vector<double>& probs) const;

 private:
  struct PendingMarginal {
    MarginalAssessment assessment;
    double m;
    double v;
  };
  struct PendingMedian {
    int k;
    double c;
    VineState vine;
  };
  struct State {
    SessionPhase phase;
    std::optional<SessionConfig> config;
    Family family = Family::normal();
    DispersionSpec dispersion;
    std::optional<DispersionSpec> pending_dispersion;
    std::optional<PowerParam> pending_power;
    std::optional<PowerParam> power;
    std::optional<VineState> vine;
    std::vector<double> marginal_alpha;
    std::optional<PendingMarginal> pending_marginal;
    std::optional<PendingMedian> pending_median;
    std::optional<int> truncation;
    std::optional<InducedPrior> induced;
  };

  json dispatch(State& s, const std::string& op, const json& in,
                bool& accepted) const;
  json op_setup(State& s, const json& in) const;
  json op_assess_dispersion(State& s, const json& in, bool& accepted) const;
  json op_set_dispersion(State& s, const json& in) const;
  json op_assess_power(State& s, const json& in, bool& accepted) const;
  json op_assess_marginal(State& s, const json& in, bool& accepted) const;
  json op_choose_conditioning(State& s, const json& in) const;
  json op_assess_conditional_median(State& s, const json& in,
                                    bool& accepted) const;
  json op_truncate(State& s, const json& in) const;
  json op_conclude(State& s, const json& in) const;
  json op_induce(State& s, const json& in) const;

  static void after_random_component(State& s);
  static void after_marginals(State& s);
  static void after_conditional(State& s);

  std::uint64_t seed_;
  State state_;
  std::vector<EventRecord> events_;
  std::set<std::string> ids_;
};

/// Monte Carlo check of the committed dispersion prior at its (mu0, w):
/// N sample means against the t approximation. The seed defaults to the
/// session seed. Families without convolution closure (simplex) need the
/// acknowledgement that the sample mean is modelled as S(mu0, w lambda).
DiscrepancyReport session_diagnostics(const Session& session, std::size_t n,
                                      std::optional<std::uint64_t> seed = {},
                                      double band_alpha = 0.05,
                                      bool acknowledge_no_convolution = false);
json to_json(const DiscrepancyReport& report);
json to_json(const CurveBundle& curves);

const std::vector<std::string>& session_operations();

}  // namespace elicit
