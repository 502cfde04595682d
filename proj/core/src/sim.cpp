#include "mixcde/sim.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <memory>
#include <mutex>
#include <thread>

#include "mixcde/distributions.hpp"
#include "mixcde/errors.hpp"
#include "mixcde/kernel.hpp"
#include "mixcde/mcmc.hpp"
#include "mixcde/rng.hpp"

namespace mixcde {

namespace {

constexpr double kDgpSd1 = 0.1;
constexpr double kDgpSd2 = 0.2;

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

CondDensity truth_evaluator() {
  return [](const Eigen::VectorXd& x, const Eigen::VectorXd& ys) {
    Eigen::VectorXd out(ys.size());
    for (Eigen::Index i = 0; i < ys.size(); ++i) out[i] = f0_true(ys[i], x[0]);
    return out;
  };
}

CondDensity posterior_mean_evaluator(std::shared_ptr<const std::vector<MixtureTheta>> draws) {
  return [draws](const Eigen::VectorXd& x, const Eigen::VectorXd& ys) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(ys.size());
    for (const MixtureTheta& t : *draws) acc += eval_conditional_density(t, x, ys);
    return Eigen::VectorXd(acc / static_cast<double>(draws->size()));
  };
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n < 10) throw DomainError("ExperimentConfig: n must be >= 10");
  if (d_x < 1) throw DomainError("ExperimentConfig: d_x must be >= 1");
  if (n_replications < 1) throw DomainError("ExperimentConfig: n_replications must be >= 1");
  if (!run_bayes && !run_kernel)
    throw DomainError("ExperimentConfig: at least one estimator must be enabled");
  if (mcmc_iters < 1 || mcmc_burnin < 0 || mcmc_burnin >= mcmc_iters)
    throw DomainError("ExperimentConfig: need 0 <= mcmc_burnin < mcmc_iters");
  if (mcmc_m_max < 1) throw DomainError("ExperimentConfig: mcmc_m_max must be >= 1");
  if (grid_ny < 2) throw DomainError("ExperimentConfig: grid_ny must be >= 2");
  if (kernel_restarts < 1) throw DomainError("ExperimentConfig: kernel_restarts must be >= 1");
  if (threads < 1) throw DomainError("ExperimentConfig: threads must be >= 1");
  if (!(prior.c_beta > 0) || !(prior.c_sigma > 0) || !(prior.c_s > 0) || !(prior.a > 0) ||
      !(prior.A_m > 0))
    throw DomainError("ExperimentConfig: prior constants must be positive");
}

double f0_true(double y, double x1) {
  const double w = std::exp(-2.0 * x1);
  return w * normal_pdf(y, x1, kDgpSd1) + (1.0 - w) * normal_pdf(y, x1 * x1 * x1 * x1, kDgpSd2);
}

double covariate_density(CovariateDist dist, double x) {
  switch (dist) {
    case CovariateDist::Uniform01:
      return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
    case CovariateDist::NormalHalf:
      return normal_pdf(x, 0.5, 1.0 / std::sqrt(12.0));
  }
  throw DomainError("covariate_density: unknown distribution");
}

std::uint64_t replication_seed(const ExperimentConfig& cfg, int r) {
  return derive_seed(cfg.seed, static_cast<std::uint64_t>(r) + 1);
}

Dataset generate_dgp(const ExperimentConfig& cfg, std::uint64_t replicate_seed) {
  cfg.validate();
  Rng rng(replicate_seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> nd(0.0, 1.0);

  Dataset data;
  data.y.resize(cfg.n);
  data.x.resize(cfg.n, cfg.d_x);
  for (int i = 0; i < cfg.n; ++i) {
    for (int k = 0; k < cfg.d_x; ++k) {
      data.x(i, k) = cfg.covariates == CovariateDist::Uniform01
                         ? u01(rng)
                         : 0.5 + nd(rng) / std::sqrt(12.0);
    }
    const double x1 = data.x(i, 0);
    if (u01(rng) < std::exp(-2.0 * x1))
      data.y[i] = x1 + kDgpSd1 * nd(rng);
    else
      data.y[i] = x1 * x1 * x1 * x1 + kDgpSd2 * nd(rng);
  }
  data.meta = DatasetMeta{replicate_seed,
                          cfg.covariates == CovariateDist::Uniform01 ? "dgp-uniform" : "dgp-normal"};
  return data;
}

namespace {

RepResult run_replication(const ExperimentConfig& cfg, int r) {
  RepResult res;
  res.replication = r;
  res.seed = replication_seed(cfg, r);

  const Dataset data = generate_dgp(cfg, res.seed);
  const EvalGrid grid = EvalGrid::default_grid(data, cfg.grid_ny);
  const CondDensity truth = truth_evaluator();

  if (cfg.run_bayes) {
    const double t0 = now_seconds();
    try {
      const PriorHyper hyper = derive_hyperparameters(data, cfg.prior.c_beta, cfg.prior.c_sigma,
                                                      cfg.prior.c_s, cfg.prior.a, cfg.prior.A_m);
      McmcOptions opt;
      opt.n_iter = cfg.mcmc_iters;
      opt.burn_in = cfg.mcmc_burnin;
      opt.m_max = cfg.mcmc_m_max;
      opt.seed = derive_seed(res.seed, 1);
      Chain chain = run_chain(data, hyper, opt);
      auto draws = std::make_shared<const std::vector<MixtureTheta>>(std::move(chain.draws));
      res.bayes_mae = mae(posterior_mean_evaluator(draws), truth, grid);
    } catch (const std::exception& e) {
      res.error += std::string("bayes: ") + e.what();
    }
    res.bayes_seconds = now_seconds() - t0;
  }

  if (cfg.run_kernel) {
    const double t0 = now_seconds();
    try {
      SelectOptions sel;
      sel.restarts = cfg.kernel_restarts;
      sel.seed = derive_seed(res.seed, 2);
      const BandwidthSelection bw = select_bandwidths(data, sel);
      CondDensity est = [&data, bw](const Eigen::VectorXd& x, const Eigen::VectorXd& ys) {
        return kernel_cond_density(data, bw.bw, x, ys).values;
      };
      res.kernel_mae = mae(est, truth, grid);
    } catch (const std::exception& e) {
      if (!res.error.empty()) res.error += "; ";
      res.error += std::string("kernel: ") + e.what();
    }
    res.kernel_seconds = now_seconds() - t0;
  }
  return res;
}

}  // namespace

MetricsReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  MetricsReport report;
  report.config = cfg;
  report.reps.resize(static_cast<size_t>(cfg.n_replications));

  const int workers = std::min(cfg.threads, cfg.n_replications);
  if (workers <= 1) {
    for (int r = 0; r < cfg.n_replications; ++r)
      report.reps[static_cast<size_t>(r)] = run_replication(cfg, r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const int r = next.fetch_add(1);
          if (r >= cfg.n_replications) return;
          report.reps[static_cast<size_t>(r)] = run_replication(cfg, r);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  // Aggregate in replication order; failed fits carry NaN and are skipped.
  double bsum = 0.0, ksum = 0.0;
  int bcount = 0, kcount = 0;
  std::vector<double> diffs;
  int better = 0;
  for (const RepResult& r : report.reps) {
    if (!r.error.empty()) {
      ++report.n_failures;
      std::cerr << "warning: replication " << r.replication << " failed: " << r.error << "\n";
    }
    if (std::isfinite(r.bayes_mae)) {
      bsum += r.bayes_mae;
      ++bcount;
    }
    if (std::isfinite(r.kernel_mae)) {
      ksum += r.kernel_mae;
      ++kcount;
    }
    if (std::isfinite(r.bayes_mae) && std::isfinite(r.kernel_mae)) {
      diffs.push_back(r.bayes_mae - r.kernel_mae);
      if (r.bayes_mae < r.kernel_mae) ++better;
    }
  }
  if (bcount > 0) report.bayes_mean = bsum / bcount;
  if (kcount > 0) report.kernel_mean = ksum / kcount;
  if (!diffs.empty()) {
    double dsum = 0.0;
    for (double d : diffs) dsum += d;
    const double dmean = dsum / static_cast<double>(diffs.size());
    report.mean_diff = dmean;
    report.frac_bayes_better = static_cast<double>(better) / static_cast<double>(diffs.size());
    if (diffs.size() >= 2) {
      double ss = 0.0;
      for (double d : diffs) ss += (d - dmean) * (d - dmean);
      const double sd = std::sqrt(ss / (static_cast<double>(diffs.size()) - 1.0));
      if (sd > 0.0)
        report.t_stat = dmean / (sd / std::sqrt(static_cast<double>(diffs.size())));
    }
  }
  return report;
}

}  // namespace mixcde
