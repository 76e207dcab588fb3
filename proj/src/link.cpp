#include "elicit/link.hpp"

#include <cmath>
#include <limits>

#include "elicit/error.hpp"

namespace elicit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool MeanDomain::contains(double mu) const {
  const bool above = lo_open ? mu > lo : mu >= lo;
  const bool below = hi_open ? mu < hi : mu <= hi;
  return above && below;
}

Link Link::from_name(std::string_view name) {
  if (name == "logit") return Link(LinkKind::logit);
  if (name == "log") return Link(LinkKind::log);
  if (name == "identity") return Link(LinkKind::identity);
  if (name == "cloglog") return Link(LinkKind::cloglog);
  if (name == "inverse") return Link(LinkKind::inverse);
  fail(ErrorKind::domain, "unknown link '" + std::string(name) + "'");
}

std::vector<Link> Link::registry() {
  return {Link(LinkKind::logit), Link(LinkKind::log),
          Link(LinkKind::identity), Link(LinkKind::cloglog),
          Link(LinkKind::inverse)};
}

std::string Link::name() const {
  switch (kind_) {
    case LinkKind::logit: return "logit";
    case LinkKind::log: return "log";
    case LinkKind::identity: return "identity";
    case LinkKind::cloglog: return "cloglog";
    case LinkKind::inverse: return "inverse";
  }
  return "";
}

MeanDomain Link::domain() const {
  switch (kind_) {
    case LinkKind::logit:
    case LinkKind::cloglog: return {0.0, 1.0};
    case LinkKind::log:
    case LinkKind::inverse: return {0.0, kInf};
    case LinkKind::identity: return {-kInf, kInf};
  }
  return {-kInf, kInf};
}

double Link::forward(double mu) const {
  require(domain().contains(mu),
          "link " + name() + ": mean " + std::to_string(mu) +
              " outside the mean domain");
  switch (kind_) {
    case LinkKind::logit: return std::log(mu) - std::log1p(-mu);
    case LinkKind::log: return std::log(mu);
    case LinkKind::identity: return mu;
    case LinkKind::cloglog: return std::log(-std::log1p(-mu));
    case LinkKind::inverse: return 1.0 / mu;
  }
  return mu;
}

double Link::inverse(double eta) const {
  switch (kind_) {
    case LinkKind::logit:
      return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta))
                      : std::exp(eta) / (1.0 + std::exp(eta));
    case LinkKind::log: return std::exp(eta);
    case LinkKind::identity: return eta;
    case LinkKind::cloglog: return -std::expm1(-std::exp(eta));
    case LinkKind::inverse:
      require(eta > 0, "inverse link: linear predictor must be positive");
      return 1.0 / eta;
  }
  return eta;
}

double Link::derivative(double mu) const {
  require(domain().contains(mu), "link " + name() + ": mean outside domain");
  switch (kind_) {
    case LinkKind::logit: return 1.0 / (mu * (1.0 - mu));
    case LinkKind::log: return 1.0 / mu;
    case LinkKind::identity: return 1.0;
    case LinkKind::cloglog: return -1.0 / ((1.0 - mu) * std::log1p(-mu));
    case LinkKind::inverse: return -1.0 / (mu * mu);
  }
  return 1.0;
}

}  // namespace elicit
