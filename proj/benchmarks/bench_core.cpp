// Microbenchmarks for the hot paths: mixture likelihood evaluation, kernel
// conditional-density evaluation, and the bandwidth cross-validation
// objective.

#include <benchmark/benchmark.h>

#include <cstdint>

#include "mixcde/kernel.hpp"
#include "mixcde/mixture.hpp"
#include "mixcde/rng.hpp"
#include "mixcde/sim.hpp"

namespace {

mixcde::Dataset make_data(int n, int d_x, std::uint64_t seed) {
  mixcde::ExperimentConfig cfg;
  cfg.n = n;
  cfg.d_x = d_x;
  return mixcde::generate_dgp(cfg, seed);
}

mixcde::MixtureTheta make_theta(int d_x, int m) {
  mixcde::Rng rng(42);
  std::normal_distribution<double> gauss;
  mixcde::MixtureTheta t;
  t.m = m;
  t.weights = Eigen::VectorXd::Constant(m, 1.0 / m);
  t.sigma_y = 0.8;
  t.sigma_x = Eigen::VectorXd::Constant(d_x, 0.6);
  for (int j = 0; j < m; ++j) {
    mixcde::Component c;
    c.beta = Eigen::VectorXd::NullaryExpr(d_x + 1, [&] { return gauss(rng); });
    c.mu_x = Eigen::VectorXd::NullaryExpr(d_x, [&] { return gauss(rng); });
    c.s_y = 1.1;
    c.s_x = Eigen::VectorXd::Constant(d_x, 0.9);
    t.comp.push_back(std::move(c));
  }
  t.validate();
  return t;
}

void bm_log_likelihood(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int m = static_cast<int>(state.range(1));
  const mixcde::Dataset data = make_data(n, 2, 1);
  const mixcde::MixtureTheta theta = make_theta(2, m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixcde::eval_log_likelihood(theta, data));
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void bm_kernel_cond_density(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const mixcde::Dataset data = make_data(n, 1, 2);
  mixcde::Bandwidths bw;
  bw.h_y = 0.15;
  bw.h_x = Eigen::VectorXd::Constant(1, 0.12);
  const Eigen::VectorXd x = data.x.row(0);
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(100, -1.0, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixcde::kernel_cond_density(data, bw, x, grid));
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void bm_lscv_objective(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const mixcde::Dataset data = make_data(n, 1, 3);
  mixcde::Bandwidths bw;
  bw.h_y = 0.15;
  bw.h_x = Eigen::VectorXd::Constant(1, 0.12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixcde::lscv_objective(data, bw));
  }
  state.SetItemsProcessed(state.iterations() * n);
}

BENCHMARK(bm_log_likelihood)->Args({100, 2})->Args({100, 10})->Args({1000, 2})->Args({1000, 10});
BENCHMARK(bm_kernel_cond_density)->Arg(100)->Arg(1000);
BENCHMARK(bm_lscv_objective)->Arg(100)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
