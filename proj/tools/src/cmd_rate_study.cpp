#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <vector>

#include "commands.hpp"
#include "common.hpp"
#include "mixcde/errors.hpp"
#include "mixcde/sim.hpp"
#include "mixcde/theory.hpp"

namespace mixcde::cli {

namespace {

struct Opts {
  std::string config_path;
  std::string out;
  std::string json_out;
  std::vector<int> n_list = {100, 1000, 10000};
  int replications = 5;
  int iters = 2500;
  int burnin = 250;
  int dx = 1;
  std::string covariates = "uniform";
  std::uint64_t seed = 0;
  int threads = 1;
};

}  // namespace

void register_rate_study(CLI::App& app) {
  auto o = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand(
      "rate-study", "posterior-mean error against sample size on a log-log scale");
  sub->add_option("--config", o->config_path, "TOML config file");
  sub->add_option("--out", o->out, "per-replication CSV path")->required();
  sub->add_option("--json", o->json_out, "JSON slope report path (default: <out>.json)");
  auto* nl_opt = sub->add_option("--n-list", o->n_list, "sample sizes")->expected(-1);
  auto* rep_opt = sub->add_option("--replications", o->replications, "replications per n");
  auto* iters_opt = sub->add_option("--iters", o->iters, "sampler iterations");
  auto* burnin_opt = sub->add_option("--burnin", o->burnin, "sampler burn-in");
  auto* dx_opt = sub->add_option("--dx", o->dx, "covariate dimension");
  auto* cov_opt = sub->add_option("--covariates", o->covariates, "uniform|normal");
  auto* seed_opt = sub->add_option("--seed", o->seed, "base seed");
  auto* thr_opt = sub->add_option("--threads", o->threads, "worker threads");

  sub->callback([=] {
    const Config cfg = load_config(o->config_path);
    std::vector<int> n_list = o->n_list;
    if (!nl_opt->count() && cfg.has("n_list")) {
      n_list.clear();
      std::string item;
      std::istringstream ss(cfg.get_string("n_list"));
      while (std::getline(ss, item, ','))
        n_list.push_back(static_cast<int>(std::stoll(item)));
    }
    if (n_list.size() < 3) throw DomainError("rate-study: need at least 3 sample sizes");
    const int reps = rep_opt->count() ? o->replications
                                      : static_cast<int>(cfg.get_int("replications", 5));

    std::ofstream csv(o->out);
    if (!csv) throw Error("cmd_rate_study: cannot open " + o->out);
    csv << "# mixcde-rate-study v1\n";
    csv << "n,replication,seed,mae\n";

    std::vector<std::pair<double, std::vector<double>>> mae_by_n;
    for (int n : n_list) {
      ExperimentConfig ec;
      ec.n = n;
      ec.d_x = dx_opt->count() ? o->dx : static_cast<int>(cfg.get_int("dx", 1));
      ec.covariates = parse_covariates(
          cov_opt->count() ? o->covariates : cfg.get_string("covariates", "uniform"));
      ec.n_replications = reps;
      ec.seed = seed_opt->count() ? o->seed : cfg.get_uint64("seed", 0);
      ec.run_kernel = false;
      ec.mcmc_iters = iters_opt->count() ? o->iters : static_cast<int>(cfg.get_int("iters", 2500));
      ec.mcmc_burnin =
          burnin_opt->count() ? o->burnin : static_cast<int>(cfg.get_int("burnin", 250));
      ec.threads = thr_opt->count() ? o->threads : static_cast<int>(cfg.get_int("threads", 1));
      const MetricsReport report = run_experiment(ec);
      std::vector<double> maes;
      for (const RepResult& r : report.reps) {
        if (!std::isfinite(r.bayes_mae)) continue;
        maes.push_back(r.bayes_mae);
        csv << format("%d,%d,%llu,%.10g\n", n, r.replication,
                      static_cast<unsigned long long>(r.seed), r.bayes_mae);
      }
      csv.flush();
      mae_by_n.emplace_back(static_cast<double>(n), std::move(maes));
      std::cout << format("n=%d: mean MAE %.4f over %zu replications\n", n, report.bayes_mean,
                          mae_by_n.back().second.size());
    }
    if (!csv) throw Error("cmd_rate_study: write failed for " + o->out);

    const RateStudyResult r = empirical_rate_study(mae_by_n, 1000, 0);
    std::cout << format("slope %.4f (bootstrap 95%%: [%.4f, %.4f]), intercept %.4f\n", r.slope,
                        r.slope_lo, r.slope_hi, r.intercept);

    nlohmann::json j{{"format", "mixcde-rate-study"},
                     {"version", 1},
                     {"slope", r.slope},
                     {"slope_lo", r.slope_lo},
                     {"slope_hi", r.slope_hi},
                     {"intercept", r.intercept}};
    const std::string json_path = o->json_out.empty() ? o->out + ".json" : o->json_out;
    std::ofstream js(json_path);
    if (!js) throw Error("cmd_rate_study: cannot open " + json_path);
    js << j.dump(2) << "\n";
  });
}

}  // namespace mixcde::cli
