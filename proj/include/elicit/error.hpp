#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace elicit {

enum class ErrorKind {
  domain,            // precondition on a value violated
  inconsistent_with_t,
  check_violation,   // conditional scale consistency check failed
  infeasible_power,
  solver,            // root bracketing / convergence failure
  numerical,         // singular or ill-conditioned matrix, quadrature failure
  illegal_transition,
  parse,
  unsupported,
  io,
  conflict,          // event id already applied
};

const char* to_string(ErrorKind kind);

/// Closed interval carried by rejections so callers can show what would have
/// been accepted.
struct Interval {
  double lo;
  double hi;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<Interval> admissible = std::nullopt)
      : std::runtime_error(what), kind_(kind), admissible_(admissible) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::optional<Interval>& admissible() const noexcept {
    return admissible_;
  }

 private:
  ErrorKind kind_;
  std::optional<Interval> admissible_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, const std::string& what,
                    ErrorKind kind = ErrorKind::domain) {
  if (!cond) throw Error(kind, what);
}

}  // namespace elicit
