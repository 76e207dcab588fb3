#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elicit/induced_prior.hpp"

namespace elicit {

/// Exit codes: 0 ok, 2 domain violation, 3 I/O, 4 schema.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitSchema = 4;

/// Runs the command line with `args` excluding the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

/// Design matrix from CSV text whose header row names the coefficients.
DesignMatrix read_design_csv(const std::string& text);

}  // namespace elicit
