#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace elicit {

/// Mean domain Omega as an interval with open/closed endpoints.
struct MeanDomain {
  double lo;
  double hi;
  bool lo_open = true;
  bool hi_open = true;

  bool contains(double mu) const;
  bool interior(double mu) const { return mu > lo && mu < hi; }
};

enum class LinkKind { logit, log, identity, cloglog, inverse };

/// Continuous invertible link g: Omega -> R.
class Link {
 public:
  explicit Link(LinkKind kind) : kind_(kind) {}
  static Link from_name(std::string_view name);
  static std::vector<Link> registry();

  LinkKind kind() const { return kind_; }
  std::string name() const;
  MeanDomain domain() const;

  double forward(double mu) const;
  double inverse(double eta) const;
  double derivative(double mu) const;
  /// sign of dg/dmu, constant over the mean domain.
  int slope_sign() const { return kind_ == LinkKind::inverse ? -1 : 1; }

  bool operator==(const Link&) const = default;

 private:
  LinkKind kind_;
};

/// Display-only clamp of feedback grids to [eps, 1 - eps] (or [eps, inf)).
inline constexpr double kDisplayEpsilon = 1e-9;

}  // namespace elicit
