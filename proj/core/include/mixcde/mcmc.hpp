#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mixcde/mixture.hpp"
#include "mixcde/prior.hpp"

namespace mixcde {

struct McmcOptions {
  int n_iter = 5000;
  int burn_in = 500;
  int m_max = 50;
  std::uint64_t seed = 0;
  int init_m = 10;
  // Disables the birth/death move (fixed component count, used by
  // detailed-balance tests).
  bool fix_m = false;
  double target_accept = 0.30;
};

struct MoveStats {
  long proposed = 0;
  long accepted = 0;
  double rate() const {
    return proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  }
};

struct Chain {
  std::vector<MixtureTheta> draws;  // post burn-in states, one per iteration
  Eigen::VectorXd logposts;         // log likelihood + log prior, aligned with draws
  std::vector<int> m_trace;         // component count at every iteration
  int n_iter = 0;
  int burn_in = 0;
  int m_max = 0;
  std::uint64_t seed = 0;
  std::map<std::string, MoveStats> moves;
  // Random-walk scales recorded when adaptation froze (end of burn-in) and
  // at the last iteration; equal values certify the post-burn-in kernel was
  // fixed.
  std::map<std::string, double> step_at_burnin;
  std::map<std::string, double> step_final;
};

// Metropolis-within-Gibbs sampler with a birth/death move on the component
// count. One iteration sweeps: per-component random walks on beta, mu_x, and
// the log local scales; a joint walk on the log global scales; a walk on the
// logit-transformed weights; and one birth/death proposal. Step sizes adapt
// toward target_accept during burn-in only. Deterministic given the seed.
Chain run_chain(const Dataset& data, const PriorHyper& hyper, const McmcOptions& opt);
Chain run_chain(const Dataset& data, const PriorHyper& hyper, int n_iter = 5000,
                int burn_in = 500, int m_max = 50, std::uint64_t seed = 0);

struct ChainDiagnostics {
  std::map<std::string, double> acceptance;
  std::map<int, double> m_histogram;  // over post burn-in draws, sums to 1
  double logpost_mean = 0.0;
  double logpost_sd = 0.0;
  double ess_logpost = 0.0;
};

ChainDiagnostics diagnostics(const Chain& chain);

// Effective sample size by the initial-positive-sequence estimator on the
// autocorrelation function. A constant series reports its full length.
double effective_sample_size(const Eigen::VectorXd& series);

// JSON-lines persistence: header line with config echo and format version,
// then one draw per line. load_chain throws ParseError (with the offending
// line index) on malformed input and UnsupportedVersionError on a version
// tag this build does not know.
void save_chain(const Chain& chain, const std::string& path);
Chain load_chain(const std::string& path);

}  // namespace mixcde
