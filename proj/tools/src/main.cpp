#include <exception>
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"conditional density estimation with covariate-dependent mixtures"};
  app.require_subcommand(1);
  mixcde::cli::register_simulate(app);
  mixcde::cli::register_fit(app);
  mixcde::cli::register_compare(app);
  mixcde::cli::register_theory_check(app);
  mixcde::cli::register_rate_study(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const mixcde::cli::VerificationFailure& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
