#include "mixcde/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixcde/distributions.hpp"
#include "mixcde/optimize.hpp"
#include "mixcde/rng.hpp"

namespace mixcde {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;

// Below this log gate mass the unnormalized denominator would underflow in
// direct arithmetic; treat the point as outside the estimator's support.
constexpr double kLogUnderflow = -700.0;

// Log gate kernels log prod_k N-kernel((x_k - x_ik)/h_x[k]) up to constants.
Eigen::VectorXd log_gate_weights(const Dataset& data, const Bandwidths& bw,
                                 const Eigen::VectorXd& x) {
  Eigen::VectorXd lw = Eigen::VectorXd::Zero(data.n());
  for (int k = 0; k < data.d_x(); ++k)
    lw.array() -= 0.5 * ((data.x.col(k).array() - x[k]) / bw.h_x[k]).square();
  return lw;
}

double population_sd(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size()));
}

}  // namespace

void Bandwidths::validate() const {
  if (!(h_y > 0.0) || !std::isfinite(h_y))
    throw DomainError("Bandwidths: h_y must be positive and finite");
  for (Eigen::Index k = 0; k < h_x.size(); ++k)
    if (!(h_x[k] > 0.0) || !std::isfinite(h_x[k]))
      throw DomainError("Bandwidths: h_x entries must be positive and finite");
}

KernelDensityResult kernel_cond_density(const Dataset& data, const Bandwidths& bw,
                                        const Eigen::VectorXd& x, const Eigen::VectorXd& ys) {
  data.validate();
  bw.validate();
  if (data.n() < 1) throw DomainError("kernel_cond_density: empty dataset");
  if (bw.h_x.size() != data.d_x())
    throw DimensionError("kernel_cond_density: h_x size != d_x");
  if (x.size() != data.d_x()) throw DimensionError("kernel_cond_density: x size != d_x");
  if (!x.allFinite() || !ys.allFinite())
    throw DomainError("kernel_cond_density: non-finite input");

  KernelDensityResult res;
  res.values = Eigen::VectorXd::Zero(ys.size());

  Eigen::VectorXd lw = log_gate_weights(data, bw, x);
  const double mx = lw.maxCoeff();
  if (mx < kLogUnderflow) {
    res.out_of_support = true;
    return res;
  }
  Eigen::VectorXd w = (lw.array() - mx).exp();
  w /= w.sum();

  // Response kernel in direct arithmetic so that scaling (y, h_y) by a power
  // of two scales the density exactly.
  const double norm = bw.h_y * kSqrt2Pi;
  for (Eigen::Index q = 0; q < ys.size(); ++q) {
    double acc = 0.0;
    for (int i = 0; i < data.n(); ++i) {
      const double z = (ys[q] - data.y[i]) / bw.h_y;
      acc += w[i] * (std::exp(-0.5 * z * z) / norm);
    }
    res.values[q] = acc;
  }
  return res;
}

double lscv_objective(const Dataset& data, const Bandwidths& bw) {
  data.validate();
  bw.validate();
  const int n = data.n();
  if (n < 3) throw DomainError("lscv_objective: need n >= 3");
  if (bw.h_x.size() != data.d_x()) throw DimensionError("lscv_objective: h_x size != d_x");

  // Log gate kernels between observations, diagonal excluded (leave-one-out).
  Eigen::MatrixXd logG = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < data.d_x(); ++k) {
    const auto col = data.x.col(k);
    for (int j = 0; j < n; ++j)
      logG.col(j).array() -= 0.5 * ((col.array() - col[j]) / bw.h_x[k]).square();
  }
  logG.diagonal().setConstant(kNegInf);

  // Row-normalize in log domain: Ghat_ij = G_ij / sum_l G_il.
  Eigen::MatrixXd ghat(n, n);
  for (int i = 0; i < n; ++i) {
    const double mx = logG.row(i).maxCoeff();
    ghat.row(i) = (logG.row(i).array() - mx).exp();
    ghat.row(i) /= ghat.row(i).sum();
  }

  // Phi_jl = Int N(y; y_j, h_y^2) N(y; y_l, h_y^2) dy = N(y_j - y_l; 0, 2 h_y^2);
  // B_ij = N(y_i - y_j; 0, h_y^2).
  const double h2 = bw.h_y * bw.h_y;
  const double phi_norm = 2.0 * bw.h_y * std::sqrt(M_PI);
  Eigen::MatrixXd phi(n, n), b(n, n);
  for (int j = 0; j < n; ++j) {
    const auto d = (data.y.array() - data.y[j]).square();
    phi.col(j) = (-(d / (4.0 * h2))).exp() / phi_norm;
    b.col(j) = (-(d / (2.0 * h2))).exp() / (bw.h_y * kSqrt2Pi);
  }

  const double t1 = ((ghat * phi).array() * ghat.array()).sum();
  const double t2 = (ghat.array() * b.array()).sum();
  return (t1 - 2.0 * t2) / n;
}

BandwidthSelection select_bandwidths(const Dataset& data, int restarts, std::uint64_t seed) {
  SelectOptions opt;
  opt.restarts = restarts;
  opt.seed = seed;
  return select_bandwidths(data, opt);
}

BandwidthSelection select_bandwidths(const Dataset& data, const SelectOptions& opt) {
  data.validate();
  const int n = data.n();
  const int d = data.d_x();
  if (n < 10) throw DomainError("select_bandwidths: need n >= 10");
  if (opt.restarts < 1) throw DomainError("select_bandwidths: restarts must be >= 1");

  // Subsample for the criterion when n is large; rescale afterwards by the
  // usual bandwidth rate in the joint dimension d_x + 1.
  Dataset sub;
  const Dataset* work = &data;
  if (n > opt.max_lscv_n) {
    Rng rng = make_rng(opt.seed, 5);
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    sub.y.resize(opt.max_lscv_n);
    sub.x.resize(opt.max_lscv_n, d);
    for (int i = 0; i < opt.max_lscv_n; ++i) {
      sub.y[i] = data.y[order[static_cast<size_t>(i)]];
      sub.x.row(i) = data.x.row(order[static_cast<size_t>(i)]);
    }
    work = &sub;
  }
  const int n_used = work->n();

  // Silverman-style pilot on the working sample.
  const double rate = std::pow(static_cast<double>(n_used), -1.0 / (d + 5.0));
  Eigen::VectorXd pilot(d + 1);
  pilot[0] = std::max(1.06 * population_sd(work->y) * rate, 1e-8);
  for (int k = 0; k < d; ++k)
    pilot[k + 1] = std::max(1.06 * population_sd(work->x.col(k)) * rate, 1e-8);

  auto objective = [&](const Eigen::VectorXd& logh) {
    Bandwidths bw;
    bw.h_y = std::exp(logh[0]);
    bw.h_x = logh.tail(d).array().exp();
    return lscv_objective(*work, bw);
  };

  // Lattice of scale multipliers (y factor, x factor) applied to the pilot.
  static const double lattice[][2] = {{1, 1}, {0.5, 0.5}, {2, 2}, {0.5, 2},
                                      {2, 0.5}, {4, 4}, {0.25, 0.25}, {1, 4}};
  const int n_lattice = static_cast<int>(sizeof(lattice) / sizeof(lattice[0]));
  Rng jitter_rng = make_rng(opt.seed, 51);
  std::normal_distribution<double> jitter(0.0, 0.25);

  NelderMeadOptions nm;
  nm.max_evals = opt.max_evals_per_start;
  nm.x_tol = 1e-4;
  nm.f_tol = 1e-10;
  nm.initial_step = 0.3;

  BandwidthSelection best;
  best.criterion = std::numeric_limits<double>::infinity();
  bool any_finite = false;
  for (int s = 0; s < opt.restarts; ++s) {
    Eigen::VectorXd start(d + 1);
    const double* fac = lattice[s % n_lattice];
    start[0] = std::log(pilot[0] * fac[0]);
    for (int k = 0; k < d; ++k) start[k + 1] = std::log(pilot[k + 1] * fac[1]);
    if (s >= n_lattice)
      for (int k = 0; k <= d; ++k) start[k] += jitter(jitter_rng);

    const NelderMeadResult r = nelder_mead(objective, start, nm);
    best.evals += r.evals;
    if (std::isfinite(r.value) && r.value < best.criterion) {
      any_finite = true;
      best.criterion = r.value;
      best.bw.h_y = std::exp(r.x[0]);
      best.bw.h_x = r.x.tail(d).array().exp();
      best.converged = r.converged;
    }
  }
  best.n_used = n_used;

  if (!any_finite)
    throw BandwidthSelectionError("select_bandwidths: no start produced a finite criterion",
                                  best);

  if (n_used < n) {
    const double adj = std::pow(static_cast<double>(n_used) / n, 1.0 / (d + 5.0));
    best.bw.h_y *= adj;
    best.bw.h_x *= adj;
  }
  return best;
}

}  // namespace mixcde
