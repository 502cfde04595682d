#pragma once

#include <string>

#include "mixcde/config.hpp"
#include "mixcde/sim.hpp"

namespace mixcde::cli {

// Empty path yields an empty configuration (every lookup falls back).
Config load_config(const std::string& path);

CovariateDist parse_covariates(const std::string& name);
PriorConstants parse_prior(const std::string& name);
const char* covariates_name(CovariateDist dist);

std::string format(const char* fmt, ...);

}  // namespace mixcde::cli
