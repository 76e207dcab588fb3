#pragma once

// Canonical JSON text: object keys sorted, no whitespace, doubles printed
// with 17 significant digits, non-finite doubles as null.

#include <string>

#include <Eigen/Dense>

#include "json.hpp"

namespace elicit {

using json = nlohmann::json;

std::string canonical_dump(const json& value);

json to_json(const Eigen::VectorXd& v);
json to_json(const Eigen::MatrixXd& m);
Eigen::VectorXd vector_from_json(const json& j);
Eigen::MatrixXd matrix_from_json(const json& j);

/// null reads back as NaN.
double number_from_json(const json& j);
/// NaN and infinities become null.
json number_to_json(double x);

}  // namespace elicit
