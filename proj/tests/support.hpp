#pragma once

// Shared fixtures and helpers for the test suites.

#include <Eigen/Core>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mixcde/mixture.hpp"
#include "mixcde/rng.hpp"

namespace mixcde::testing {

// Two-component reference mixture (d_x = 1). All unit-test expectations for
// this instance were computed by direct arithmetic on the density formula:
//   gate_j(x) = alpha_j exp{-0.5 ((x - mu_j)/(sigma_x s_xj))^2},
//   f(y|x)    = sum_j gate_j(x)/sum_i gate_i(x) * N(y; b0j + b1j x, sigma_y s_yj).
inline MixtureTheta two_component_theta() {
  MixtureTheta t;
  t.m = 2;
  t.weights = Eigen::Vector2d(0.3, 0.7);
  t.sigma_y = 0.5;
  t.sigma_x = Eigen::VectorXd::Constant(1, 0.6);
  Component c1;
  c1.beta = Eigen::Vector2d(0.2, 1.0);
  c1.mu_x = Eigen::VectorXd::Constant(1, 0.2);
  c1.s_y = 1.2;
  c1.s_x = Eigen::VectorXd::Constant(1, 0.8);
  Component c2;
  c2.beta = Eigen::Vector2d(-0.1, 0.5);
  c2.mu_x = Eigen::VectorXd::Constant(1, 0.9);
  c2.s_y = 0.7;
  c2.s_x = Eigen::VectorXd::Constant(1, 1.5);
  t.comp = {c1, c2};
  t.validate();
  return t;
}

// Four-point regression set with a closed-form OLS solution:
// x = {0,1,0,1}, y = {0,1,1,2}  =>  intercept 0.5, slope 1, RSS/n = 0.25.
inline Dataset tiny_ols_dataset() {
  Dataset d;
  d.y = Eigen::Vector4d(0.0, 1.0, 0.0 + 1.0, 2.0);
  d.x = Eigen::MatrixXd(4, 1);
  d.x << 0.0, 1.0, 0.0, 1.0;
  d.validate();
  return d;
}

// Random but valid mixture parameters for property tests. Scales are kept
// within two orders of magnitude of 1 so quadrature windows stay finite.
inline MixtureTheta random_theta(Rng& rng, int d_x, int max_m = 5) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  MixtureTheta t;
  t.m = 1 + static_cast<int>(u(rng) * max_m);
  if (t.m > max_m) t.m = max_m;
  Eigen::VectorXd w(t.m);
  for (int j = 0; j < t.m; ++j) w[j] = 0.05 + u(rng);
  t.weights = w / w.sum();
  t.sigma_y = std::exp(0.8 * n(rng));
  t.sigma_x = Eigen::VectorXd(d_x);
  for (int k = 0; k < d_x; ++k) t.sigma_x[k] = std::exp(0.8 * n(rng));
  for (int j = 0; j < t.m; ++j) {
    Component c;
    c.beta = Eigen::VectorXd(d_x + 1);
    for (int k = 0; k <= d_x; ++k) c.beta[k] = n(rng);
    c.mu_x = Eigen::VectorXd(d_x);
    for (int k = 0; k < d_x; ++k) c.mu_x[k] = n(rng);
    c.s_y = std::exp(0.5 * n(rng));
    c.s_x = Eigen::VectorXd(d_x);
    for (int k = 0; k < d_x; ++k) c.s_x[k] = std::exp(0.5 * n(rng));
    t.comp.push_back(std::move(c));
  }
  t.validate();
  return t;
}

// Integration window covering all component response means at covariate x
// plus a generous multiple of the widest response scale.
inline void response_window(const MixtureTheta& t, const Eigen::VectorXd& x, double& lo,
                            double& hi) {
  Eigen::VectorXd xt(x.size() + 1);
  xt[0] = 1.0;
  xt.tail(x.size()) = x;
  lo = 1e300;
  hi = -1e300;
  double widest = 0.0;
  for (const auto& c : t.comp) {
    const double mean = c.beta.dot(xt);
    lo = std::min(lo, mean);
    hi = std::max(hi, mean);
    widest = std::max(widest, t.sigma_y * c.s_y);
  }
  lo -= 12.0 * widest;
  hi += 12.0 * widest;
}

struct TempDir {
  std::string path;
  TempDir() {
    char tmpl[] = "/tmp/mixcde-test-XXXXXX";
    path = mkdtemp(tmpl);
  }
  ~TempDir() {
    const std::string cmd = "rm -rf '" + path + "'";
    [[maybe_unused]] int rc = std::system(cmd.c_str());
  }
  std::string file(const std::string& name) const { return path + "/" + name; }
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

// Runs a shell command, capturing combined stdout/stderr and the exit code.
inline CommandResult run_command(const std::string& cmd) {
  CommandResult res;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return res;
  char buf[4096];
  while (size_t got = fread(buf, 1, sizeof buf, pipe)) res.output.append(buf, got);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

}  // namespace mixcde::testing
