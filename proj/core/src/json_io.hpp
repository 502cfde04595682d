#pragma once

#include <json.hpp>

#include "mixcde/mixture.hpp"

// Internal nlohmann-based conversions shared by serialize.cpp and chain
// persistence; the vendored header stays out of the public include tree.

namespace mixcde::detail {

nlohmann::json vec_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vec_from_json(const nlohmann::json& j);

nlohmann::json theta_to_json(const MixtureTheta& theta);
MixtureTheta theta_from_json(const nlohmann::json& j);

}  // namespace mixcde::detail
