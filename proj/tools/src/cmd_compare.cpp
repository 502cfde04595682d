#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <vector>

#include "commands.hpp"
#include "common.hpp"
#include "mixcde/errors.hpp"
#include "mixcde/sim.hpp"

namespace mixcde::cli {

namespace {

struct Opts {
  std::string config_path;
  std::string out;
  std::string json_out;
  int n = 100;
  int dx = 1;
  std::string covariates = "uniform";
  int replications = 20;
  std::uint64_t seed = 0;
  int iters = 5000;
  int burnin = 500;
  std::string prior = "default";
  int threads = 1;
  int grid_ny = 100;
  int kernel_restarts = 4;
  bool full_table = false;
};

std::string csv_cell(double v) { return std::isfinite(v) ? format("%.6g", v) : std::string(); }

void append_row_csv(std::ostream& out, const MetricsReport& r) {
  out << covariates_name(r.config.covariates) << ',' << r.config.d_x << ',' << r.config.n << ','
      << csv_cell(r.bayes_mean) << ',' << csv_cell(r.kernel_mean) << ','
      << csv_cell(r.mean_diff) << ',' << csv_cell(r.frac_bayes_better) << ','
      << csv_cell(r.t_stat) << "\n";
}

nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::json reps = nlohmann::json::array();
  for (const RepResult& rep : r.reps) {
    reps.push_back({{"replication", rep.replication},
                    {"seed", rep.seed},
                    {"bayes_mae", rep.bayes_mae},
                    {"kernel_mae", rep.kernel_mae},
                    {"bayes_seconds", rep.bayes_seconds},
                    {"kernel_seconds", rep.kernel_seconds},
                    {"error", rep.error}});
  }
  return {{"g0", covariates_name(r.config.covariates)},
          {"d_x", r.config.d_x},
          {"n", r.config.n},
          {"replications", r.config.n_replications},
          {"seed", r.config.seed},
          {"iters", r.config.mcmc_iters},
          {"burnin", r.config.mcmc_burnin},
          {"bayes_mean", r.bayes_mean},
          {"kernel_mean", r.kernel_mean},
          {"mean_diff", r.mean_diff},
          {"frac_bayes_better", r.frac_bayes_better},
          {"t_stat", r.t_stat},
          {"n_failures", r.n_failures},
          {"reps", std::move(reps)}};
}

}  // namespace

void register_compare(CLI::App& app) {
  auto o = std::make_shared<Opts>();
  CLI::App* sub =
      app.add_subcommand("compare", "score the posterior mean against the kernel estimator");
  sub->add_option("--config", o->config_path, "TOML config file");
  sub->add_option("--out", o->out, "output CSV path")->required();
  sub->add_option("--json", o->json_out, "JSON report path (default: <out>.json)");
  auto* n_opt = sub->add_option("--n", o->n, "sample size");
  auto* dx_opt = sub->add_option("--dx", o->dx, "covariate dimension");
  auto* cov_opt = sub->add_option("--covariates", o->covariates, "uniform|normal");
  auto* rep_opt = sub->add_option("--replications", o->replications, "Monte Carlo replications");
  auto* seed_opt = sub->add_option("--seed", o->seed, "base seed");
  auto* iters_opt = sub->add_option("--iters", o->iters, "sampler iterations");
  auto* burnin_opt = sub->add_option("--burnin", o->burnin, "sampler burn-in");
  auto* prior_opt = sub->add_option("--prior", o->prior, "default|alt");
  auto* thr_opt = sub->add_option("--threads", o->threads, "worker threads over replications");
  auto* ny_opt = sub->add_option("--grid-ny", o->grid_ny, "points on the y grid");
  auto* kr_opt = sub->add_option("--kernel-restarts", o->kernel_restarts,
                                 "bandwidth search restarts");
  sub->add_flag("--full-table", o->full_table,
                "run the full nine-experiment grid instead of one configuration");

  sub->callback([=] {
    const Config cfg = load_config(o->config_path);
    ExperimentConfig base;
    base.n = n_opt->count() ? o->n : static_cast<int>(cfg.get_int("n", base.n));
    base.d_x = dx_opt->count() ? o->dx : static_cast<int>(cfg.get_int("dx", base.d_x));
    base.covariates = parse_covariates(cov_opt->count() ? o->covariates
                                                        : cfg.get_string("covariates", "uniform"));
    base.n_replications = rep_opt->count()
                              ? o->replications
                              : static_cast<int>(cfg.get_int("replications", base.n_replications));
    base.seed = seed_opt->count() ? o->seed : cfg.get_uint64("seed", 0);
    base.mcmc_iters = iters_opt->count() ? o->iters : static_cast<int>(cfg.get_int("iters", 5000));
    base.mcmc_burnin =
        burnin_opt->count() ? o->burnin : static_cast<int>(cfg.get_int("burnin", 500));
    base.prior = parse_prior(prior_opt->count() ? o->prior : cfg.get_string("prior", "default"));
    base.threads = thr_opt->count() ? o->threads : static_cast<int>(cfg.get_int("threads", 1));
    base.grid_ny = ny_opt->count() ? o->grid_ny : static_cast<int>(cfg.get_int("grid_ny", 100));
    base.kernel_restarts = kr_opt->count()
                               ? o->kernel_restarts
                               : static_cast<int>(cfg.get_int("kernel_restarts", 4));
    const bool full = o->full_table || cfg.get_bool("full_table", false);

    std::vector<ExperimentConfig> configs;
    if (!full) {
      configs.push_back(base);
    } else {
      // The nine-experiment grid: three sample sizes at d_x=1, then
      // d_x in {1,3,5} for both covariate laws at n=1000, then the
      // alternative-prior configuration.
      auto with = [&base](int n, int dx, CovariateDist cov, const PriorConstants& pc) {
        ExperimentConfig c = base;
        c.n = n;
        c.d_x = dx;
        c.covariates = cov;
        c.prior = pc;
        return c;
      };
      const PriorConstants dflt = PriorConstants::defaults();
      configs.push_back(with(100, 1, CovariateDist::Uniform01, dflt));
      configs.push_back(with(10000, 1, CovariateDist::Uniform01, dflt));
      configs.push_back(with(1000, 1, CovariateDist::Uniform01, dflt));
      configs.push_back(with(1000, 3, CovariateDist::Uniform01, dflt));
      configs.push_back(with(1000, 5, CovariateDist::Uniform01, dflt));
      configs.push_back(with(1000, 1, CovariateDist::NormalHalf, dflt));
      configs.push_back(with(1000, 3, CovariateDist::NormalHalf, dflt));
      configs.push_back(with(1000, 5, CovariateDist::NormalHalf, dflt));
      configs.push_back(with(1000, 1, CovariateDist::Uniform01, PriorConstants::alternative()));
    }

    std::ofstream csv(o->out);
    if (!csv) throw Error("cmd_compare: cannot open " + o->out);
    csv << "# mixcde-compare v1\n";
    csv << "g0,d_x,n,Bayes,Kernel,B-K,%(B<K),t-stat\n";
    nlohmann::json rows = nlohmann::json::array();
    for (const ExperimentConfig& ec : configs) {
      const MetricsReport report = run_experiment(ec);
      append_row_csv(csv, report);
      csv.flush();
      rows.push_back(report_to_json(report));
      std::cout << format("%s d_x=%d n=%d: Bayes %.4f Kernel %.4f (%d failures)\n",
                          covariates_name(ec.covariates), ec.d_x, ec.n, report.bayes_mean,
                          report.kernel_mean, report.n_failures);
    }
    if (!csv) throw Error("cmd_compare: write failed for " + o->out);
    csv.close();

    nlohmann::json j{{"format", "mixcde-compare"}, {"version", 1}, {"rows", std::move(rows)}};
    const std::string json_path = o->json_out.empty() ? o->out + ".json" : o->json_out;
    std::ofstream js(json_path);
    if (!js) throw Error("cmd_compare: cannot open " + json_path);
    js << j.dump(2) << "\n";
    std::cout << "wrote " << o->out << " and " << json_path << "\n";
  });
}

}  // namespace mixcde::cli
