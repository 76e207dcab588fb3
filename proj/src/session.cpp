#include "elicit/session.hpp"

#include <cmath>
#include <limits>

#include "elicit/error.hpp"
#include "elicit/random.hpp"
#include "elicit/special.hpp"

namespace elicit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const json& field(const json& in, const char* key) {
  require(in.is_object() && in.contains(key),
          std::string("missing input '") + key + "'", ErrorKind::parse);
  return in.at(key);
}

double num(const json& in, const char* key) {
  const json& v = field(in, key);
  require(v.is_number(), std::string("input '") + key + "' must be a number",
          ErrorKind::parse);
  return v.get<double>();
}

std::optional<double> opt_num(const json& in, const char* key) {
  if (!in.is_object() || !in.contains(key) || in.at(key).is_null()) return {};
  return num(in, key);
}

int integer(const json& in, const char* key) {
  const json& v = field(in, key);
  require(v.is_number_integer(),
          std::string("input '") + key + "' must be an integer", ErrorKind::parse);
  return v.get<int>();
}

std::optional<int> opt_integer(const json& in, const char* key) {
  if (!in.is_object() || !in.contains(key) || in.at(key).is_null()) return {};
  return integer(in, key);
}

bool flag(const json& in, const char* key, bool fallback) {
  if (!in.is_object() || !in.contains(key)) return fallback;
  require(in.at(key).is_boolean(),
          std::string("input '") + key + "' must be a boolean", ErrorKind::parse);
  return in.at(key).get<bool>();
}

std::string text(const json& in, const char* key, const std::string& fallback) {
  if (!in.is_object() || !in.contains(key) || in.at(key).is_null()) return fallback;
  require(in.at(key).is_string(),
          std::string("input '") + key + "' must be a string", ErrorKind::parse);
  return in.at(key).get<std::string>();
}

json family_json(const Family& f) {
  json out = {{"name", f.name()}};
  if (f.kind() == FamilyKind::compound_poisson) {
    out["param"] = f.power() ? json(*f.power()) : json(nullptr);
  } else if (f.kind() == FamilyKind::lognormal_target) {
    out["param"] = f.base();
  }
  return out;
}

Family family_from_json(const json& j) {
  if (j.is_string()) return Family::from_name(j.get<std::string>());
  return Family::from_name(text(j, "name", ""), opt_num(j, "param"));
}

json interval_json(const Interval& iv) { return {{"lo", iv.lo}, {"hi", iv.hi}}; }

json dispersion_json(const DispersionSpec& d) {
  json out = {{"known", d.is_known()}};
  if (d.is_known()) {
    out["phi"] = d.prior.phi();
  } else {
    out["s"] = d.s();
    out["r"] = d.r();
  }
  out["mu0"] = d.mu0 ? json(*d.mu0) : json(nullptr);
  out["w"] = d.w ? json(*d.w) : json(nullptr);
  out["v_phi"] = d.v_phi ? json(*d.v_phi) : json(nullptr);
  return out;
}

json power_json(const PowerParam& p) {
  return {{"c0", number_to_json(p.c0)},
          {"r_p", number_to_json(p.r_p)},
          {"p", p.p},
          {"r", p.r},
          {"r_p_upper", number_to_json(p.r_p_upper)}};
}

Eigen::MatrixXd symmetric_view(const Eigen::MatrixXd& lower) {
  Eigen::MatrixXd out = lower;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = i + 1; j < out.cols(); ++j) out(i, j) = lower(j, i);
  return out;
}

ConditioningSide side_from(const std::string& s) {
  if (s == "lower") return ConditioningSide::lower;
  if (s == "upper") return ConditioningSide::upper;
  fail(ErrorKind::parse, "side must be 'lower' or 'upper'");
}

const char* side_name(ConditioningSide s) {
  return s == ConditioningSide::lower ? "lower" : "upper";
}

json scenario_json(const ScenarioSet& sc, int i) {
  json cov = json::object();
  for (std::size_t c = 0; c < sc.names.size(); ++c)
    cov[sc.names[c]] = sc.U(i, static_cast<Eigen::Index>(c));
  json out = {{"index", i}, {"covariates", cov}};
  if (!sc.descriptions.empty())
    out["description"] = sc.descriptions[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace

json to_json(const CurveBundle& c) {
  json out = {{"median", number_to_json(c.median)}};
  out["grid"] = json::array();
  out["density"] = json::array();
  out["cdf"] = json::array();
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    out["grid"].push_back(number_to_json(c.grid[i]));
    out["density"].push_back(number_to_json(c.density[i]));
    out["cdf"].push_back(number_to_json(c.cdf[i]));
  }
  out["probs"] = c.probs;
  out["quantiles"] = json::array();
  for (double q : c.quantiles) out["quantiles"].push_back(number_to_json(q));
  return out;
}

json to_json(const DiscrepancyReport& r) {
  return {{"kolmogorov", r.kolmogorov},
          {"dkw_epsilon", r.dkw_epsilon},
          {"band_alpha", r.band_alpha},
          {"kl_estimate", r.kl_estimate ? json(*r.kl_estimate) : json(nullptr)},
          {"kl_stderr", r.kl_stderr ? json(*r.kl_stderr) : json(nullptr)},
          {"n_samples", r.n_samples},
          {"partial", r.partial}};
}

const std::vector<std::string>& session_operations() {
  static const std::vector<std::string> ops = {
      "setup",           "assess_dispersion",
      "set_dispersion",  "assess_power",
      "assess_marginal", "choose_conditioning",
      "assess_conditional_median", "truncate",
      "conclude",        "induce"};
  return ops;
}

// ---------------------------------------------------------------------------

std::string SessionPhase::label() const {
  switch (kind) {
    case PhaseKind::setup: return "Setup";
    case PhaseKind::random_component: return "RandomComponent";
    case PhaseKind::power_parameter: return "PowerParameter";
    case PhaseKind::marginals: return "Marginals(" + std::to_string(index) + ")";
    case PhaseKind::vine_level:
      return "VineLevel(" + std::to_string(index) + "," +
             (target ? std::to_string(*target) : std::string("-")) + ")";
    case PhaseKind::truncated: return "Truncated(" + std::to_string(index) + ")";
    case PhaseKind::concluded: return "Concluded";
  }
  return "";
}

json SessionPhase::to_json() const {
  static const char* names[] = {"setup",      "random_component", "power_parameter",
                                "marginals",  "vine_level",       "truncated",
                                "concluded"};
  json out = {{"kind", names[static_cast<int>(kind)]}, {"label", label()}};
  if (kind == PhaseKind::marginals || kind == PhaseKind::vine_level ||
      kind == PhaseKind::truncated)
    out["index"] = index;
  if (kind == PhaseKind::vine_level)
    out["target"] = target ? json(*target) : json(nullptr);
  return out;
}

json SessionConfig::to_json() const {
  json sc = {{"U", elicit::to_json(Eigen::MatrixXd(scenarios.U))},
             {"names", scenarios.names},
             {"link", scenarios.link.name()},
             {"descriptions", scenarios.descriptions},
             {"known_phi", scenarios.known_phi ? json(*scenarios.known_phi)
                                               : json(nullptr)}};
  sc["families"] = json::array();
  for (const auto& f : scenarios.families) sc["families"].push_back(family_json(f));
  return {{"scenarios", sc},
          {"family", family_json(family)},
          {"alpha1", alpha1},
          {"alpha2", alpha2},
          {"feedback_probs", feedback_probs},
          {"grid_size", grid_size}};
}

SessionConfig SessionConfig::from_json(const json& j) {
  SessionConfig c;
  const json& sc = field(j, "scenarios");
  c.scenarios.U = matrix_from_json(field(sc, "U"));
  for (const auto& n : field(sc, "names")) c.scenarios.names.push_back(n.get<std::string>());
  c.scenarios.link = Link::from_name(text(sc, "link", "identity"));
  if (sc.contains("descriptions"))
    for (const auto& d : sc.at("descriptions"))
      c.scenarios.descriptions.push_back(d.get<std::string>());
  c.scenarios.known_phi = opt_num(sc, "known_phi");
  c.family = family_from_json(field(j, "family"));
  if (sc.contains("families")) {
    for (const auto& f : sc.at("families")) c.scenarios.families.push_back(family_from_json(f));
  } else {
    c.scenarios.families = {c.family};
  }
  c.alpha1 = opt_num(j, "alpha1").value_or(kDefaultAlpha1);
  c.alpha2 = opt_num(j, "alpha2").value_or(kDefaultAlpha2);
  if (j.contains("feedback_probs")) {
    c.feedback_probs.clear();
    for (const auto& p : j.at("feedback_probs")) c.feedback_probs.push_back(p.get<double>());
  }
  c.grid_size = opt_integer(j, "grid_size").value_or(201);
  return c;
}

json EventRecord::to_json() const {
  return {{"seq", seq},     {"id", id},           {"timestamp", timestamp},
          {"phase", phase}, {"op", op},           {"inputs", inputs},
          {"accepted", accepted}, {"deltas", deltas}, {"synthetic", synthetic}};
}

EventRecord EventRecord::from_json(const json& j) {
  EventRecord e;
  e.seq = integer(j, "seq");
  e.id = text(j, "id", "");
  e.timestamp = text(j, "timestamp", "");
  e.phase = text(j, "phase", "");
  e.op = text(j, "op", "");
  e.inputs = field(j, "inputs");
  e.accepted = flag(j, "accepted", true);
  e.deltas = field(j, "deltas");
  e.synthetic = flag(j, "synthetic", false);
  return e;
}

// ---------------------------------------------------------------------------

Session::Session(std::uint64_t seed) : seed_(seed) {}

const SessionConfig& Session::config() const {
  require(state_.config.has_value(), "session: setup has not been applied",
          ErrorKind::illegal_transition);
  return *state_.config;
}

const VineState& Session::vine() const {
  require(state_.vine.has_value(), "session: setup has not been applied",
          ErrorKind::illegal_transition);
  return *state_.vine;
}

Link Session::link() const { return config().scenarios.link; }

EventRecord Session::apply(const EventRequest& request) {
  const std::string id =
      request.id.empty() ? "e" + std::to_string(events_.size() + 1) : request.id;
  if (ids_.count(id)) throw Error(ErrorKind::conflict, "event '" + id + "' already applied");
  State next = state_;
  bool accepted = true;
  json deltas;
  try {
    deltas = dispatch(next, request.op, request.inputs, accepted);
  } catch (const Error& e) {
    throw Error(e.kind(), state_.phase.label() + ": " + e.what(), e.admissible());
  }
  deltas["phase_after"] = next.phase.label();

  EventRecord rec;
  rec.seq = static_cast<int>(events_.size()) + 1;
  rec.id = id;
  rec.timestamp = request.timestamp;
  rec.phase = state_.phase.label();
  rec.op = request.op;
  rec.inputs = request.inputs.is_null() ? json::object() : request.inputs;
  rec.accepted = accepted;
  rec.deltas = std::move(deltas);
  rec.synthetic = request.synthetic;

  state_ = std::move(next);
  events_.push_back(rec);
  ids_.insert(id);
  return rec;
}

json Session::dispatch(State& s, const std::string& op, const json& in,
                       bool& accepted) const {
  require(in.is_object() || in.is_null(), "event inputs must be an object",
          ErrorKind::parse);
  const json inputs = in.is_null() ? json::object() : in;
  if (op == "setup") return op_setup(s, inputs);
  require(s.config.has_value(), "setup must come first", ErrorKind::illegal_transition);
  if (op == "assess_dispersion") return op_assess_dispersion(s, inputs, accepted);
  if (op == "set_dispersion") return op_set_dispersion(s, inputs);
  if (op == "assess_power") return op_assess_power(s, inputs, accepted);
  if (op == "assess_marginal") return op_assess_marginal(s, inputs, accepted);
  if (op == "choose_conditioning") return op_choose_conditioning(s, inputs);
  if (op == "assess_conditional_median")
    return op_assess_conditional_median(s, inputs, accepted);
  if (op == "truncate") return op_truncate(s, inputs);
  if (op == "conclude") return op_conclude(s, inputs);
  if (op == "induce") return op_induce(s, inputs);
  fail(ErrorKind::parse, "unknown operation '" + op + "'");
}

namespace {

void expect_phase(const SessionPhase& p, PhaseKind kind, const char* op) {
  require(p.kind == kind, std::string(op) + " is not legal in this phase",
          ErrorKind::illegal_transition);
}

}  // namespace

json Session::op_setup(State& s, const json& in) const {
  expect_phase(s.phase, PhaseKind::setup, "setup");
  SessionConfig cfg = SessionConfig::from_json(in);
  cfg.scenarios.validate();
  require(cfg.alpha1 > 0 && cfg.alpha1 < cfg.alpha2 && cfg.alpha2 < 1,
          "setup: need 0 < alpha1 < alpha2 < 1");
  require(cfg.grid_size >= 2, "setup: grid_size must be at least 2");
  bool listed = false;
  for (const auto& f : cfg.scenarios.families) listed = listed || f.kind() == cfg.family.kind();
  require(listed, "setup: elicitation family must belong to the family set");
  require(cfg.family.kind() != FamilyKind::lognormal_target,
          "setup: elicit a lognormal target on the log scale with the normal family",
          ErrorKind::unsupported);
  s.family = cfg.family;
  s.vine.emplace(cfg.scenarios.n());
  s.marginal_alpha.assign(static_cast<std::size_t>(cfg.scenarios.n()), kNaN);
  if (cfg.scenarios.known_phi) {
    require(cfg.family.kind() != FamilyKind::compound_poisson || cfg.family.power(),
            "setup: compound Poisson with known dispersion needs a fixed power",
            ErrorKind::unsupported);
    s.dispersion = DispersionSpec::known(*cfg.scenarios.known_phi);
    s.phase = {PhaseKind::marginals, 0, {}};
  } else {
    s.phase = {PhaseKind::random_component, 0, {}};
  }
  const int n = cfg.scenarios.n();
  s.config = std::move(cfg);
  return {{"n", n}};
}

void Session::after_random_component(State& s) {
  s.pending_dispersion.reset();
  if (s.family.kind() == FamilyKind::compound_poisson && !s.family.power()) {
    s.phase = {PhaseKind::power_parameter, 0, {}};
  } else {
    s.phase = {PhaseKind::marginals, 0, {}};
  }
}

json Session::op_assess_dispersion(State& s, const json& in, bool& accepted) const {
  expect_phase(s.phase, PhaseKind::random_component, "assess_dispersion");
  const double a1 = opt_num(in, "alpha1").value_or(s.config->alpha1);
  const double a2 = opt_num(in, "alpha2").value_or(s.config->alpha2);
  // A compound Poisson fit before p is known uses v(mu) = mu^1.5 only as a
  // placeholder; r is recomputed from v_phi once p is elicited.
  const Family fam = s.family.kind() == FamilyKind::compound_poisson && !s.family.power()
                         ? Family::compound_poisson(1.5)
                         : s.family;
  DispersionSpec spec = elicit_dispersion(num(in, "mu0"), num(in, "w"), num(in, "d1"),
                                          a1, num(in, "d2"), a2, fam);
  accepted = flag(in, "accept", true);
  json out = dispersion_json(spec);
  if (accepted) {
    s.dispersion = spec;
    after_random_component(s);
  } else {
    s.pending_dispersion = spec;
  }
  return out;
}

json Session::op_set_dispersion(State& s, const json& in) const {
  expect_phase(s.phase, PhaseKind::random_component, "set_dispersion");
  require(s.family.kind() != FamilyKind::compound_poisson || s.family.power(),
          "set_dispersion: compound Poisson needs its power fixed first",
          ErrorKind::unsupported);
  s.dispersion = dispersion_from_parameters(num(in, "s"), num(in, "r"),
                                            num(in, "mu0"), num(in, "w"), s.family);
  after_random_component(s);
  return dispersion_json(s.dispersion);
}

json Session::op_assess_power(State& s, const json& in, bool& accepted) const {
  expect_phase(s.phase, PhaseKind::power_parameter, "assess_power");
  const DispersionSpec& d = s.dispersion;
  require(d.mu0 && d.w && d.v_phi, "assess_power: dispersion fit incomplete");
  PowerParam pp{};
  if (const auto p = opt_num(in, "p")) {
    require(*p > 1 && *p < 2, "assess_power: need 1 < p < 2");
    pp = {kNaN, kNaN, *p, power_rate_known_p(*p, *d.mu0, *d.w, d.s(), *d.v_phi),
          power_rate_upper_bound(*d.mu0, *d.w, d.s(), *d.v_phi)};
  } else {
    pp = elicit_power_parameter(num(in, "c0"), *d.mu0, *d.w, d.s(), *d.v_phi);
  }
  accepted = flag(in, "accept", true);
  if (accepted) {
    s.power = pp;
    s.pending_power.reset();
    s.family = Family::compound_poisson(pp.p);
    s.dispersion.prior = PrecisionPrior::gamma(d.s(), pp.r);
    s.phase = {PhaseKind::marginals, 0, {}};
  } else {
    s.pending_power = pp;
  }
  return power_json(pp);
}

void Session::after_marginals(State& s) {
  s.pending_marginal.reset();
  const int n = s.vine->n();
  if (s.phase.index + 1 < n) {
    s.phase = {PhaseKind::marginals, s.phase.index + 1, {}};
  } else if (n == 1) {
    s.phase = {PhaseKind::concluded, 0, {}};
  } else {
    s.phase = {PhaseKind::vine_level, 1, {}};
  }
}

json Session::op_assess_marginal(State& s, const json& in, bool& accepted) const {
  expect_phase(s.phase, PhaseKind::marginals, "assess_marginal");
  const int i = s.phase.index;
  if (const auto given = opt_integer(in, "scenario"))
    require(*given == i, "assess_marginal: marginals are elicited in scenario order",
            ErrorKind::illegal_transition);
  const MarginalAssessment a{i, num(in, "a"), num(in, "b"), num(in, "alpha")};
  const auto [m, v] = elicit_marginal(a, s.config->scenarios.link, s.dispersion.prior);
  accepted = flag(in, "accept", true);
  if (accepted) {
    s.vine->set_marginal(i, m, v);
    s.marginal_alpha[static_cast<std::size_t>(i)] = a.alpha;
    after_marginals(s);
  } else {
    s.pending_marginal = PendingMarginal{a, m, v};
  }
  return {{"scenario", i}, {"m", m}, {"v", v}};
}

json Session::op_choose_conditioning(State& s, const json& in) const {
  expect_phase(s.phase, PhaseKind::vine_level, "choose_conditioning");
  require(!s.phase.target, "choose_conditioning: conditioning value already fixed",
          ErrorKind::illegal_transition);
  const int level = s.phase.index;
  const int j = level - 1;
  const Link link = s.config->scenarios.link;
  const std::string mode = text(in, "mode", "explicit");
  const std::string disp = text(in, "dispersion", "elicited");
  require(disp == "elicited" || disp == "unit",
          "choose_conditioning: dispersion must be 'elicited' or 'unit'", ErrorKind::parse);
  const ConditioningMode cm = disp == "unit" ? ConditioningMode::unit_dispersion
                                             : ConditioningMode::elicited_dispersion;
  const double alpha =
      opt_num(in, "alpha").value_or(s.marginal_alpha[static_cast<std::size_t>(j)]);

  json out = {{"level", level}, {"scenario", j}, {"mode", mode}};
  double mu_hat = kNaN;
  std::optional<ConditioningSide> side;
  if (mode == "explicit") {
    if (const auto v = opt_num(in, "value")) {
      mu_hat = *v;
    } else {
      side = side_from(text(in, "side", ""));
    }
  } else if (mode == "systematic") {
    side = level % 2 == 1 ? ConditioningSide::upper : ConditioningSide::lower;
  } else if (mode == "random") {
    RandomSource rng(seed_, 1000u + static_cast<std::uint32_t>(level));
    side = rng.uniform() < 0.5 ? ConditioningSide::lower : ConditioningSide::upper;
  } else {
    fail(ErrorKind::parse, "choose_conditioning: mode must be explicit, systematic or random");
  }
  if (side) {
    mu_hat = propose_conditioning_value(*s.vine, level, alpha, *side, cm, link,
                                        s.dispersion.prior);
    out["side"] = side_name(*side);
    out["alpha"] = alpha;
    out["dispersion"] = disp;
  }
  require(link.domain().interior(mu_hat),
          "choose_conditioning: value outside the mean domain");
  const double eta = link.forward(mu_hat);
  s.vine->open_level(level, eta);
  s.phase.target = level;
  out["mu_hat"] = mu_hat;
  out["eta_hat"] = eta;
  return out;
}

void Session::after_conditional(State& s) {
  s.pending_median.reset();
  const VineState& v = *s.vine;
  const int level = s.phase.index;
  if (v.level_complete(level)) {
    if (level == v.n() - 1) {
      s.phase = {PhaseKind::concluded, 0, {}};
    } else {
      s.phase = {PhaseKind::vine_level, level + 1, {}};
    }
    return;
  }
  for (int k = level; k < v.n(); ++k) {
    if (!v.v_set(k, level - 1)) {
      s.phase.target = k;
      return;
    }
  }
}

json Session::op_assess_conditional_median(State& s, const json& in,
                                           bool& accepted) const {
  expect_phase(s.phase, PhaseKind::vine_level, "assess_conditional_median");
  require(s.phase.target.has_value(),
          "assess_conditional_median: choose the conditioning value first",
          ErrorKind::illegal_transition);
  const int level = s.phase.index;
  const int k = opt_integer(in, "k").value_or(*s.phase.target);
  require(k >= level && k < s.vine->n(), "assess_conditional_median: target out of range");
  require(!s.vine->v_set(k, level - 1),
          "assess_conditional_median: target already committed at this level",
          ErrorKind::illegal_transition);
  const double c = num(in, "c");
  VineState trial = *s.vine;
  trial.record_conditional_median(k, c, s.config->scenarios.link);
  json out = {{"level", level},
              {"k", k},
              {"c", c},
              {"v_kj", trial.V()(k, level - 1)},
              {"rho", trial.rho()(level - 1, k)},
              {"cond_scale", trial.cond_scales()(k, level)}};
  accepted = flag(in, "accept", true);
  if (accepted) {
    s.vine = std::move(trial);
    after_conditional(s);
  } else {
    s.pending_median = PendingMedian{k, c, std::move(trial)};
  }
  return out;
}

json Session::op_truncate(State& s, const json& in) const {
  expect_phase(s.phase, PhaseKind::vine_level, "truncate");
  const int t = integer(in, "t");
  require(t >= 0 && t <= s.vine->completed_levels(),
          "truncate: t must not exceed the completed tree levels");
  s.truncation = t;
  s.pending_median.reset();
  s.phase = {PhaseKind::truncated, t, {}};
  return {{"t", t}};
}

json Session::op_conclude(State& s, const json&) const {
  expect_phase(s.phase, PhaseKind::truncated, "conclude");
  s.phase = {PhaseKind::concluded, 0, {}};
  return json::object();
}

json Session::op_induce(State& s, const json& in) const {
  require(s.phase.kind == PhaseKind::truncated || s.phase.kind == PhaseKind::concluded,
          "induce is legal only after truncation or conclusion",
          ErrorKind::illegal_transition);
  const Eigen::MatrixXd X = matrix_from_json(field(in, "X"));
  std::vector<std::string> names;
  if (in.contains("names"))
    for (const auto& n : in.at("names")) names.push_back(n.get<std::string>());
  Eigen::VectorXd offset;
  if (in.contains("offset")) offset = vector_from_json(in.at("offset"));
  const DesignMatrix dm(X, names, offset);
  InduceOptions opt;
  opt.elicited = s.family;
  opt.target = in.contains("family") ? family_from_json(in.at("family")) : s.family;
  opt.mu0 = opt_num(in, "mu0");
  opt.target_phi = opt_num(in, "target_phi");

  // Evaluate the final model on this state, not the committed one.
  Session probe(seed_);
  probe.state_ = s;
  const InducedPrior ip =
      induce_prior(probe.final_location(), probe.final_scale(), s.dispersion, dm, opt);
  s.induced = ip;
  json out = {{"names", dm.names},
              {"delta", to_json(ip.delta)},
              {"sigma", to_json(ip.sigma)},
              {"q", ip.q},
              {"family", family_json(opt.target)}};
  if (ip.prior.is_known()) {
    out["phi"] = ip.prior.phi();
  } else {
    out["s"] = ip.prior.shape();
    out["r"] = ip.prior.rate();
  }
  return out;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd Session::final_location() const {
  require(state_.phase.kind == PhaseKind::truncated ||
              state_.phase.kind == PhaseKind::concluded,
          "session: the elicited model is final only after truncation or conclusion",
          ErrorKind::illegal_transition);
  return state_.vine->m();
}

Eigen::MatrixXd Session::final_scale() const {
  (void)final_location();
  const VineState& v = *state_.vine;
  if (state_.truncation) return v.truncate(*state_.truncation).first;
  return v.V().selfadjointView<Eigen::Lower>();
}

Eigen::MatrixXd Session::final_correlation() const {
  (void)final_location();
  const VineState& v = *state_.vine;
  if (state_.truncation) return v.truncate(*state_.truncation).second;
  return v.correlation();
}

json Session::snapshot() const {
  json out = {{"seed", seed_},
              {"phase", state_.phase.to_json()},
              {"events", events_.size()}};
  if (!state_.config) return out;
  const VineState& v = *state_.vine;
  out["family"] = family_json(state_.family);
  out["dispersion"] = dispersion_json(state_.dispersion);
  out["power"] = state_.power ? power_json(*state_.power) : json(nullptr);
  out["vine"] = {{"m", to_json(v.m())},
                 {"V", to_json(symmetric_view(v.V()))},
                 {"rho", to_json(Eigen::MatrixXd(v.rho()))},
                 {"medians", to_json(Eigen::MatrixXd(v.medians()))},
                 {"eta_hat", to_json(v.eta_hat())},
                 {"completed_levels", v.completed_levels()}};
  out["truncation"] = state_.truncation ? json(*state_.truncation) : json(nullptr);
  if (state_.phase.kind == PhaseKind::truncated ||
      state_.phase.kind == PhaseKind::concluded) {
    out["final"] = {{"m", to_json(final_location())},
                    {"V", to_json(final_scale())},
                    {"R", to_json(final_correlation())}};
  }
  json pending = json::object();
  if (state_.pending_dispersion) pending["dispersion"] = dispersion_json(*state_.pending_dispersion);
  if (state_.pending_power) pending["power"] = power_json(*state_.pending_power);
  if (state_.pending_marginal)
    pending["marginal"] = {{"m", state_.pending_marginal->m},
                           {"v", state_.pending_marginal->v}};
  if (state_.pending_median)
    pending["median"] = {{"k", state_.pending_median->k},
                         {"c", state_.pending_median->c}};
  out["pending"] = pending;
  if (state_.induced) {
    out["induced"] = {{"delta", to_json(state_.induced->delta)},
                      {"sigma", to_json(state_.induced->sigma)},
                      {"q", state_.induced->q}};
  }
  return out;
}

json Session::feedback() const {
  if (!state_.config) return feedback(201, {});
  return feedback(state_.config->grid_size, state_.config->feedback_probs);
}

json Session::feedback(int grid_size, const std::vector<double>& probs) const {
  const SessionPhase& ph = state_.phase;
  json out = {{"phase", ph.to_json()}};
  if (!state_.config) return out;
  const SessionConfig& cfg = *state_.config;
  const Link link = cfg.scenarios.link;
  const PrecisionPrior& prior = state_.dispersion.prior;
  const VineState& v = *state_.vine;

  switch (ph.kind) {
    case PhaseKind::setup: break;
    case PhaseKind::random_component: {
      out["ratio_bound"] = dispersion_ratio_bound(cfg.alpha1, cfg.alpha2);
      out["alpha1"] = cfg.alpha1;
      out["alpha2"] = cfg.alpha2;
      if (const auto& p = state_.pending_dispersion) {
        json pend = dispersion_json(*p);
        if (p->quantiles) {
          const auto& q = *p->quantiles;
          const double ratio = (q.d1 - q.mu0) / (q.d2 - q.mu0);
          pend["ratio"] = ratio;
          pend["margin"] = dispersion_ratio_bound(q.alpha1, q.alpha2) - ratio;
        }
        const GenT1 mean(*p->mu0, *p->v_phi / p->prior.ratio(), p->prior);
        pend["curves"] = to_json(curves_for(mean, Link(LinkKind::identity), probs, grid_size));
        out["pending"] = pend;
      }
      break;
    }
    case PhaseKind::power_parameter: {
      const DispersionSpec& d = state_.dispersion;
      const double upper = power_rate_upper_bound(*d.mu0, *d.w, d.s(), *d.v_phi);
      out["r_p_upper"] = upper;
      out["c0_admissible"] = interval_json(
          {0.0, std::exp(-gamma_quantile(0.5, 0.5 * d.s(), 1.0) / upper)});
      if (state_.pending_power) out["pending"] = power_json(*state_.pending_power);
      break;
    }
    case PhaseKind::marginals: {
      out["scenario"] = scenario_json(cfg.scenarios, ph.index);
      if (const auto& p = state_.pending_marginal) {
        out["pending"] = {{"a", p->assessment.a},
                          {"b", p->assessment.b},
                          {"alpha", p->assessment.alpha},
                          {"m", p->m},
                          {"v", p->v},
                          {"curves", to_json(curves_for(GenT1(p->m, p->v, prior), link,
                                                        probs, grid_size))}};
      }
      break;
    }
    case PhaseKind::vine_level: {
      const int level = ph.index;
      const int j = level - 1;
      out["level"] = level;
      out["conditioning_scenario"] = scenario_json(cfg.scenarios, j);
      if (!ph.target) {
        const double alpha = state_.marginal_alpha[static_cast<std::size_t>(j)];
        json proposals = json::object();
        for (const auto& [name, mode] :
             {std::pair{"elicited", ConditioningMode::elicited_dispersion},
              std::pair{"unit", ConditioningMode::unit_dispersion}}) {
          json entry = json::object();
          for (auto side : {ConditioningSide::lower, ConditioningSide::upper}) {
            try {
              entry[side_name(side)] =
                  propose_conditioning_value(v, level, alpha, side, mode, link, prior);
            } catch (const Error&) {
              entry[side_name(side)] = nullptr;
            }
          }
          proposals[name] = entry;
        }
        out["alpha"] = alpha;
        out["proposals"] = proposals;
        out["curves"] =
            to_json(conditional_feedback(v, j, j, link, prior, probs, grid_size));
        break;
      }
      const int k = *ph.target;
      out["target"] = scenario_json(cfg.scenarios, k);
      out["mu_hat"] = link.inverse(v.eta_hat()(j));
      out["bounds"] = interval_json(v.feasible_median_bounds(k, link));
      out["previous_scale"] = v.cond_scales()(k, j);
      json remaining = json::array();
      for (int kk = level; kk < v.n(); ++kk)
        if (!v.v_set(kk, j)) remaining.push_back(kk);
      out["remaining"] = remaining;
      out["curves"] =
          to_json(conditional_feedback(v, k, j, link, prior, probs, grid_size));
      if (const auto& p = state_.pending_median) {
        out["pending"] = {
            {"k", p->k},
            {"c", p->c},
            {"cond_scale", p->vine.cond_scales()(p->k, level)},
            {"curves", to_json(conditional_feedback(p->vine, p->k, level, link,
                                                    prior, probs, grid_size))}};
      }
      break;
    }
    case PhaseKind::truncated:
    case PhaseKind::concluded: {
      out["m"] = to_json(final_location());
      out["V"] = to_json(final_scale());
      out["threshold"] = kTruncationThreshold;
      if (v.completed_levels() == v.n() - 1) {
        json scan = json::array();
        for (const auto& p : truncation_scan(v))
          scan.push_back({{"t", p.t}, {"divergence", p.divergence},
                          {"substantial", p.substantial}});
        out["truncation_scan"] = scan;
      }
      json marg = json::array();
      for (int i = 0; i < v.n(); ++i)
        marg.push_back(to_json(marginal_feedback(v, i, link, prior, probs, grid_size)));
      out["marginals"] = marg;
      break;
    }
  }
  return out;
}

DiscrepancyReport session_diagnostics(const Session& session, std::size_t n,
                                      std::optional<std::uint64_t> seed,
                                      double band_alpha,
                                      bool acknowledge_no_convolution) {
  const DispersionSpec& d = session.dispersion();
  require(!d.is_known() && d.mu0 && d.w,
          "diagnostics: needs an elicited dispersion prior",
          ErrorKind::illegal_transition);
  SampleMeanOptions opt;
  opt.acknowledge_no_convolution = acknowledge_no_convolution;
  const auto pairs = sample_mean_mc(session.family(), *d.mu0, *d.w, d, n,
                                    seed.value_or(session.seed()), opt);
  return discrepancy_report(pairs, session.family(), *d.mu0, *d.w, d, band_alpha);
}

}  // namespace elicit
