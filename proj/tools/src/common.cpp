#include "common.hpp"

#include <cstdarg>
#include <cstdio>

#include "mixcde/errors.hpp"

namespace mixcde::cli {

Config load_config(const std::string& path) {
  if (path.empty()) return Config::parse_string("");
  return Config::parse_file(path);
}

CovariateDist parse_covariates(const std::string& name) {
  if (name == "uniform") return CovariateDist::Uniform01;
  if (name == "normal") return CovariateDist::NormalHalf;
  throw DomainError("covariates must be 'uniform' or 'normal', got '" + name + "'");
}

PriorConstants parse_prior(const std::string& name) {
  if (name == "default") return PriorConstants::defaults();
  if (name == "alt") return PriorConstants::alternative();
  throw DomainError("prior must be 'default' or 'alt', got '" + name + "'");
}

const char* covariates_name(CovariateDist dist) {
  return dist == CovariateDist::Uniform01 ? "uniform" : "normal";
}

std::string format(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buf[256];
  const int len = std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return std::string(buf, buf + (len < 0 ? 0 : len));
}

}  // namespace mixcde::cli
