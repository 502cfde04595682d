#pragma once

#include <CLI11.hpp>
#include <stdexcept>

namespace mixcde::cli {

// Thrown by commands whose job is to verify something and the verification
// failed; main maps it to exit code 1 (usage errors exit 2, other runtime
// failures exit 3).
struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void register_simulate(CLI::App& app);
void register_fit(CLI::App& app);
void register_compare(CLI::App& app);
void register_theory_check(CLI::App& app);
void register_rate_study(CLI::App& app);

}  // namespace mixcde::cli
