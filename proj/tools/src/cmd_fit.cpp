#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "common.hpp"
#include "mixcde/errors.hpp"
#include "mixcde/mcmc.hpp"
#include "mixcde/metrics.hpp"
#include "mixcde/serialize.hpp"
#include "mixcde/sim.hpp"

namespace mixcde::cli {

namespace {

struct Opts {
  std::string config_path;
  std::string data_path;
  std::string out;
  std::string curves_out;
  int iters = 5000;
  int burnin = 500;
  int m_max = 50;
  std::uint64_t seed = 0;
  std::string prior = "default";
  int grid_ny = 100;
  std::vector<double> quantiles = {0.00005, 0.99995};
};

void write_curves(const std::string& path, const EvalGrid& grid,
                  const std::vector<MixtureTheta>& draws, const std::vector<double>& quantiles) {
  std::ofstream out(path);
  if (!out) throw Error("cmd_fit: cannot open " + path);
  out << "# mixcde-curves v1\n";
  const int d = static_cast<int>(grid.xs.front().size());
  for (int k = 1; k <= d; ++k) out << "x" << k << ",";
  out << "y,mean";
  for (double q : quantiles) out << format(",q%g", q);
  out << "\n";
  for (const Eigen::VectorXd& x : grid.xs) {
    const PredictiveSummary s = posterior_predictive(draws, x, grid.ys, quantiles);
    for (Eigen::Index i = 0; i < grid.ys.size(); ++i) {
      for (int k = 0; k < d; ++k) out << format("%.10g,", x[k]);
      out << format("%.10g,%.10g", grid.ys[i], s.mean[i]);
      for (const Eigen::VectorXd& curve : s.curves) out << format(",%.10g", curve[i]);
      out << "\n";
    }
  }
  if (!out) throw Error("cmd_fit: write failed for " + path);
}

}  // namespace

void register_fit(CLI::App& app) {
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("fit", "run the posterior sampler on a dataset CSV");
  sub->add_option("--config", o->config_path, "TOML config file");
  sub->add_option("--data", o->data_path, "input dataset CSV")->required();
  sub->add_option("--out", o->out, "output chain JSONL path")->required();
  sub->add_option("--curves", o->curves_out,
                  "predictive curves CSV path (default: <out>.curves.csv)");
  auto* iters_opt = sub->add_option("--iters", o->iters, "total iterations");
  auto* burnin_opt = sub->add_option("--burnin", o->burnin, "burn-in iterations");
  auto* mmax_opt = sub->add_option("--m-max", o->m_max, "component cap");
  auto* seed_opt = sub->add_option("--seed", o->seed, "sampler seed");
  auto* prior_opt = sub->add_option("--prior", o->prior, "default|alt");
  auto* ny_opt = sub->add_option("--grid-ny", o->grid_ny, "points on the y grid");
  sub->add_option("--quantiles", o->quantiles, "predictive band quantiles in (0,1)")
      ->expected(-1);

  sub->callback([o, iters_opt, burnin_opt, mmax_opt, seed_opt, prior_opt, ny_opt] {
    const Config cfg = load_config(o->config_path);
    McmcOptions mc;
    mc.n_iter = iters_opt->count() ? o->iters : static_cast<int>(cfg.get_int("iters", 5000));
    mc.burn_in = burnin_opt->count() ? o->burnin : static_cast<int>(cfg.get_int("burnin", 500));
    mc.m_max = mmax_opt->count() ? o->m_max : static_cast<int>(cfg.get_int("m_max", 50));
    mc.seed = seed_opt->count() ? o->seed : cfg.get_uint64("seed", 0);
    const PriorConstants pc =
        parse_prior(prior_opt->count() ? o->prior : cfg.get_string("prior", "default"));
    const int grid_ny = ny_opt->count() ? o->grid_ny : static_cast<int>(cfg.get_int("grid_ny", 100));

    const Dataset data = load_dataset_csv(o->data_path);
    const PriorHyper hyper =
        derive_hyperparameters(data, pc.c_beta, pc.c_sigma, pc.c_s, pc.a, pc.A_m);
    const Chain chain = run_chain(data, hyper, mc);
    save_chain(chain, o->out);

    const std::string curves_path =
        o->curves_out.empty() ? o->out + ".curves.csv" : o->curves_out;
    write_curves(curves_path, EvalGrid::default_grid(data, grid_ny), chain.draws, o->quantiles);

    const ChainDiagnostics diag = diagnostics(chain);
    std::cout << "wrote " << o->out << " (" << chain.draws.size() << " draws) and "
              << curves_path << "\n";
    std::cout << format("logpost mean %.4f sd %.4f ess %.1f\n", diag.logpost_mean,
                        diag.logpost_sd, diag.ess_logpost);
    double mean_m = 0.0;
    for (const auto& [m, p] : diag.m_histogram) mean_m += m * p;
    std::cout << format("mean m %.2f; acceptance:", mean_m);
    for (const auto& [name, rate] : diag.acceptance) std::cout << format(" %s=%.2f", name.c_str(), rate);
    std::cout << "\n";
  });
}

}  // namespace mixcde::cli
