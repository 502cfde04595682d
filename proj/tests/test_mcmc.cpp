#include <cmath>
#include <fstream>

#include "doctest.h"
#include "mixcde/errors.hpp"
#include "mixcde/mcmc.hpp"
#include "mixcde/serialize.hpp"
#include "mixcde/sim.hpp"
#include "support.hpp"

using namespace mixcde;
using mixcde::testing::read_file;
using mixcde::testing::TempDir;
using mixcde::testing::write_file;

namespace {

Dataset small_dgp(int n = 40, std::uint64_t seed = 3) {
  ExperimentConfig cfg;
  cfg.n = n;
  return generate_dgp(cfg, seed);
}

McmcOptions quick_options(std::uint64_t seed = 0) {
  McmcOptions opt;
  opt.n_iter = 400;
  opt.burn_in = 100;
  opt.seed = seed;
  return opt;
}

}  // namespace

TEST_CASE("mcmc: chains are deterministic in the seed") {
  const Dataset d = small_dgp();
  const PriorHyper h = derive_hyperparameters(d);
  const Chain a = run_chain(d, h, quick_options(7));
  const Chain b = run_chain(d, h, quick_options(7));
  const Chain c = run_chain(d, h, quick_options(8));
  REQUIRE(a.logposts.size() == b.logposts.size());
  for (Eigen::Index i = 0; i < a.logposts.size(); ++i) CHECK(a.logposts[i] == b.logposts[i]);
  CHECK(a.m_trace == b.m_trace);
  bool identical = a.logposts.size() == c.logposts.size();
  if (identical)
    for (Eigen::Index i = 0; i < a.logposts.size(); ++i)
      identical = identical && a.logposts[i] == c.logposts[i];
  CHECK_FALSE(identical);
}

TEST_CASE("mcmc: recorded log posterior equals likelihood plus prior exactly") {
  // The sampler keeps cached gate/response columns; the contract is that the
  // cache never drifts from a from-scratch evaluation, bit for bit.
  const Dataset d = small_dgp();
  const PriorHyper h = derive_hyperparameters(d);
  const Chain chain = run_chain(d, h, quick_options(11));
  REQUIRE(chain.draws.size() == 300);
  for (size_t i = 0; i < chain.draws.size(); i += 17) {
    const double fresh = eval_log_likelihood(chain.draws[i], d) +
                         log_prior_density(chain.draws[i], h, chain.m_max);
    CHECK(chain.logposts[static_cast<Eigen::Index>(i)] == fresh);
  }
}

TEST_CASE("mcmc: bookkeeping shapes and move inventory") {
  const Dataset d = small_dgp();
  const PriorHyper h = derive_hyperparameters(d);
  McmcOptions opt = quick_options(5);
  const Chain chain = run_chain(d, h, opt);
  CHECK(chain.n_iter == opt.n_iter);
  CHECK(chain.burn_in == opt.burn_in);
  CHECK(chain.m_max == opt.m_max);
  CHECK(static_cast<int>(chain.m_trace.size()) == opt.n_iter);
  CHECK(static_cast<int>(chain.draws.size()) == opt.n_iter - opt.burn_in);
  CHECK(chain.logposts.size() == static_cast<Eigen::Index>(chain.draws.size()));
  for (const char* name : {"beta", "mu_x", "local_scale", "global_scale", "weights"}) {
    REQUIRE(chain.moves.count(name) == 1);
    CHECK(chain.moves.at(name).proposed > 0);
    CHECK(chain.step_at_burnin.count(name) == 1);
    CHECK(chain.step_final.count(name) == 1);
  }
  // Exactly one birth/death proposal per sweep.
  CHECK(chain.moves.count("birth") + chain.moves.count("death") == 2);
  CHECK(chain.moves.at("birth").proposed + chain.moves.at("death").proposed == opt.n_iter);
  for (const auto& [name, st] : chain.moves) {
    CHECK(st.accepted >= 0);
    CHECK(st.accepted <= st.proposed);
  }
}

TEST_CASE("mcmc: step sizes freeze at the end of burn-in") {
  const Dataset d = small_dgp();
  const PriorHyper h = derive_hyperparameters(d);
  const Chain chain = run_chain(d, h, quick_options(13));
  REQUIRE_FALSE(chain.step_at_burnin.empty());
  for (const auto& [name, value] : chain.step_at_burnin) {
    REQUIRE(chain.step_final.count(name) == 1);
    CHECK(chain.step_final.at(name) == value);
  }
}

TEST_CASE("mcmc: fixed component count disables the dimension move") {
  const Dataset d = small_dgp();
  const PriorHyper h = derive_hyperparameters(d);
  McmcOptions opt = quick_options(17);
  opt.fix_m = true;
  opt.init_m = 3;
  const Chain chain = run_chain(d, h, opt);
  for (int m : chain.m_trace) CHECK(m == 3);
  for (const auto& t : chain.draws) CHECK(t.m == 3);
  const long rj = (chain.moves.count("birth") ? chain.moves.at("birth").proposed : 0) +
                  (chain.moves.count("death") ? chain.moves.at("death").proposed : 0);
  CHECK(rj == 0);
}

TEST_CASE("mcmc: empty dataset reduces the chain to the prior (smoke)") {
  Dataset empty;
  empty.y = Eigen::VectorXd();
  empty.x = Eigen::MatrixXd(0, 1);
  PriorHyper h;
  h.beta_mean = Eigen::Vector2d(0.0, 0.0);
  h.beta_prec = Eigen::Matrix2d::Identity();
  h.mu_mean = Eigen::VectorXd::Constant(1, 0.5);
  h.mu_prec = Eigen::MatrixXd::Constant(1, 1, 12.0);
  h.s_y_prec2 = {10.0, 10.0};
  h.s_x_prec2 = {10.0, 10.0};
  h.sigma_y_inv = {3.0, 3.0};
  h.sigma_x_inv = {{3.0, 3.0}};
  h.validate();
  McmcOptions opt = quick_options(23);
  const Chain chain = run_chain(empty, h, opt);
  CHECK(static_cast<int>(chain.draws.size()) == opt.n_iter - opt.burn_in);
  // With no data the likelihood is identically 1, so the recorded log
  // posterior is just the log prior density.
  for (size_t i = 0; i < chain.draws.size(); i += 37)
    CHECK(chain.logposts[static_cast<Eigen::Index>(i)] ==
          log_prior_density(chain.draws[i], h, opt.m_max));
}

TEST_CASE("mcmc: diagnostics summarize the chain") {
  const Dataset d = small_dgp();
  const PriorHyper h = derive_hyperparameters(d);
  const Chain chain = run_chain(d, h, quick_options(29));
  const ChainDiagnostics diag = diagnostics(chain);
  double hist = 0.0;
  for (const auto& [m, p] : diag.m_histogram) {
    CHECK(m >= 1);
    CHECK(p >= 0.0);
    hist += p;
  }
  CHECK(hist == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(diag.logpost_mean == doctest::Approx(chain.logposts.mean()).epsilon(1e-12));
  CHECK(diag.logpost_sd >= 0.0);
  CHECK(diag.ess_logpost > 0.0);
  CHECK(diag.ess_logpost <= chain.logposts.size() + 1e-9);
  for (const auto& [name, rate] : diag.acceptance) {
    CHECK(rate >= 0.0);
    CHECK(rate <= 1.0);
  }
}

TEST_CASE("mcmc: effective sample size estimator") {
  SUBCASE("constant series reports its full length") {
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(500, 3.25);
    CHECK(effective_sample_size(c) == doctest::Approx(500.0));
  }
  SUBCASE("iid noise keeps most of its length") {
    Rng rng(31);
    std::normal_distribution<double> nd;
    Eigen::VectorXd z(20000);
    for (int i = 0; i < z.size(); ++i) z[i] = nd(rng);
    const double ess = effective_sample_size(z);
    CHECK(ess > 0.5 * z.size());
    CHECK(ess <= 1.5 * z.size());
  }
  SUBCASE("AR(1) with rho 0.9 loses the theoretical factor (1-rho)/(1+rho)") {
    Rng rng(37);
    std::normal_distribution<double> nd;
    const int n = 20000;
    Eigen::VectorXd z(n);
    double state = 0.0;
    for (int i = 0; i < n; ++i) {
      state = 0.9 * state + std::sqrt(1.0 - 0.81) * nd(rng);
      z[i] = state;
    }
    const double factor = effective_sample_size(z) / n;
    const double expected = 0.05263157894736841;  // (1-0.9)/(1+0.9)
    CHECK(factor > expected / 2.0);
    CHECK(factor < expected * 2.0);
  }
}

TEST_CASE("mcmc: chain persistence round-trips exactly") {
  const Dataset d = small_dgp(30, 5);
  const PriorHyper h = derive_hyperparameters(d);
  McmcOptions opt = quick_options(41);
  opt.n_iter = 120;
  opt.burn_in = 40;
  const Chain chain = run_chain(d, h, opt);

  TempDir tmp;
  const std::string path = tmp.file("chain.jsonl");
  save_chain(chain, path);
  const Chain back = load_chain(path);

  CHECK(back.n_iter == chain.n_iter);
  CHECK(back.burn_in == chain.burn_in);
  CHECK(back.m_max == chain.m_max);
  CHECK(back.seed == chain.seed);
  CHECK(back.m_trace == chain.m_trace);
  REQUIRE(back.draws.size() == chain.draws.size());
  REQUIRE(back.logposts.size() == chain.logposts.size());
  for (Eigen::Index i = 0; i < chain.logposts.size(); ++i)
    CHECK(back.logposts[i] == chain.logposts[i]);
  for (size_t i = 0; i < chain.draws.size(); i += 13) {
    const MixtureTheta& a = chain.draws[i];
    const MixtureTheta& b = back.draws[i];
    REQUIRE(a.m == b.m);
    for (int j = 0; j < a.m; ++j) {
      CHECK(a.weights[j] == b.weights[j]);
      CHECK(a.comp[j].beta == b.comp[j].beta);
      CHECK(a.comp[j].mu_x == b.comp[j].mu_x);
      CHECK(a.comp[j].s_y == b.comp[j].s_y);
      CHECK(a.comp[j].s_x == b.comp[j].s_x);
    }
    CHECK(a.sigma_y == b.sigma_y);
    CHECK(a.sigma_x == b.sigma_x);
  }
  for (const auto& [name, st] : chain.moves) {
    REQUIRE(back.moves.count(name) == 1);
    CHECK(back.moves.at(name).proposed == st.proposed);
    CHECK(back.moves.at(name).accepted == st.accepted);
  }
  CHECK(back.step_at_burnin == chain.step_at_burnin);
  CHECK(back.step_final == chain.step_final);

  SUBCASE("truncated file is a parse error with a line number") {
    const std::string text = read_file(path);
    const std::string cut = text.substr(0, text.size() * 2 / 3);
    const std::string broken = tmp.file("broken.jsonl");
    write_file(broken, cut);
    CHECK_THROWS_AS(load_chain(broken), ParseError);
  }
  SUBCASE("unknown format version is rejected distinctly") {
    std::string text = read_file(path);
    const auto pos = text.find("\"version\":");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string("\"version\":").size() + 1, "\"version\":9");
    const std::string vpath = tmp.file("badversion.jsonl");
    write_file(vpath, text);
    CHECK_THROWS_AS(load_chain(vpath), UnsupportedVersionError);
  }
  SUBCASE("missing file is reported") { CHECK_THROWS_AS(load_chain(tmp.file("nope")), Error); }
}
