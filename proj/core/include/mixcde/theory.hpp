#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mixcde/metrics.hpp"
#include "mixcde/prior.hpp"
#include "mixcde/rng.hpp"

namespace mixcde {

// Inputs of the posterior contraction rate formula.
struct RateParams {
  double beta_smooth = 1.0;  // Holder smoothness of the target
  int d = 2;                 // d_y + d_x
  double tau = 1.0;          // tail exponent of the target
  double tau1 = 1.0;         // component-count prior exponent
  double tau2 = 1.0;         // covariate-law tail exponent
  std::int64_t n = 1000;
  void validate() const;
};

struct RateResult {
  double s = 0.0;
  double t0 = 0.0;
  double t_min = 0.0;
  double eps_n = 0.0;
};

// s = 1 + 1/beta + 1/tau; t0 = (d*s + max{tau1, 1, tau2/tau}) / (2 + d/beta);
// t_min = t0 + max{0, (1 - tau1)/2}; eps_n = n^(-beta/(2beta+d)) (log n)^t at
// t = t_min * (1 + 1e-9).
RateResult contraction_rate(const RateParams& p);

// Smallest n beyond which eps_n at these parameters decreases in n
// (n^(-r) (log n)^t turns over at log n = t / r).
std::int64_t eps_n_monotone_from(const RateParams& p);

// Sieve description: m <= H, weights >= alpha_floor, scale in
// [sigma_lo, sigma_hi], response locations in [-mu_bar, mu_bar]^d_y.
struct SieveSpec {
  int H = 1;
  double sigma_lo = 1.0;
  double sigma_hi = 1.0;
  double mu_bar = 1.0;
  double alpha_floor = 0.5;
  double eps = 0.5;
  int d_y = 1;
  int d_x = 1;
  void validate() const;
};

struct CoveringBound {
  double log_value = 0.0;
  // Present when exp(log_value) is representable; exact integer arithmetic
  // when below 2^53.
  std::optional<double> value;
  // The five factors as printed: H, ceil(...)^(H d_y), ceil(...)^(H d_x),
  // H ceil(...)^(H-1), ceil(...).
  std::array<double, 5> log_factors{};
};

// Upper bound on the entropy J(eps, F, d_SS): the product of ceilings
//   H * ceil(16 mu_bar d_y / (sigma_lo eps))^(H d_y)
//     * ceil(48 d_x / (sigma_lo^2 eps))^(H d_x)
//     * H ceil(log(1/alpha_floor) / log(1 + eps/(12H)))^(H-1)
//     * ceil(log(sigma_hi/sigma_lo) / log(1 + sigma_lo^2 eps / (48 max{d_x,d_y}))),
// assembled in log space. Requires eps in (0,1) and sigma_lo <= 1.
CoveringBound sieve_covering_bound(const SieveSpec& s);

struct ComplementBound {
  double total = 0.0;
  // Addends in printed order: location tail, small-weight, component-count
  // tail, small-sigma tail, large-sigma tail.
  std::array<double, 5> terms{};
};

// Upper bound on the prior mass outside the sieve:
//   H^2 exp(-a13 mu_bar^tau3) + H^2 alpha_floor^(a/H)
//   + exp(-a10 H (log H)^tau1) + a1 exp(-a2 sigma_lo^(-2 a3))
//   + a4 exp(-2 a5 log sigma_hi).
ComplementBound sieve_complement_bound(const SieveSpec& s,
                                       const PriorConditionConstants& constants, double a);

struct ComplementEstimate {
  double estimate = 0.0;
  double se = 0.0;
  int n_mc = 0;
};

// Monte Carlo frequency of prior draws landing outside the sieve (response
// scale and intercepts checked against the sieve boxes). Report-only
// companion to sieve_complement_bound.
ComplementEstimate mc_sieve_complement(const SieveSpec& s, const PriorHyper& hyper, int m_max,
                                       int n_mc, Rng& rng);

struct LemmaA1Result {
  double lhs = 0.0;     // squared covariate-integrated Hellinger distance
  double rhs = 0.0;     // (4 g_bar / u_floor) * joint-square-root integral
  double margin = 0.0;  // rhs - lhs
  bool pass = false;
};

using CovariateDensity = std::function<double(const Eigen::VectorXd&)>;

// Checks d_h^2(f0, f; g0) <= (4 g_bar / u_floor) *
//   Int (sqrt(f0(y|x) u(x)) - sqrt(f(y|x) g(x)))^2 dy dx
// over x in [0,1]^d_x by tensor quadrature. Requires g0 <= g_bar and
// u >= u_floor > 0 on the box. pass = margin >= -tol.
LemmaA1Result check_lemma_a1(const CondDensity& f0, const CondDensity& f,
                             const CovariateDensity& g0, const CovariateDensity& u,
                             const CovariateDensity& g, double g_bar, double u_floor, int d_x,
                             const YQuad& quad, int x_nodes = 32, double tol = 1e-6);

struct RateStudyResult {
  double slope = 0.0;
  double intercept = 0.0;
  Eigen::VectorXd log_n;
  Eigen::VectorXd log_mean_mae;
  // Percentile bootstrap over replicate MAEs.
  double slope_lo = 0.0;
  double slope_hi = 0.0;
};

// Least-squares slope of log(mean MAE) on log n; requires at least 3
// distinct n values. Bootstrap resamples replicate MAEs within each n.
RateStudyResult empirical_rate_study(
    const std::vector<std::pair<double, std::vector<double>>>& mae_by_n,
    int n_bootstrap = 1000, std::uint64_t seed = 0);

}  // namespace mixcde
