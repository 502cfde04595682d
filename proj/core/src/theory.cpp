#include "mixcde/theory.hpp"

#include <algorithm>
#include <cmath>

#include "mixcde/errors.hpp"
#include "mixcde/quadrature.hpp"

namespace mixcde {

namespace {

// e * log(c) with the convention that a zero exponent contributes nothing
// even when c = 0.
double pow_log(double c, double e) {
  if (e == 0.0) return 0.0;
  return e * std::log(c);
}

double simple_ols_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double* intercept) {
  const double xbar = x.mean();
  const double ybar = y.mean();
  const double sxx = (x.array() - xbar).square().sum();
  const double sxy = ((x.array() - xbar) * (y.array() - ybar)).sum();
  const double slope = sxy / sxx;
  if (intercept) *intercept = ybar - slope * xbar;
  return slope;
}

}  // namespace

void RateParams::validate() const {
  if (!(beta_smooth > 0.0)) throw DomainError("RateParams: beta_smooth must be positive");
  if (d < 1) throw DomainError("RateParams: d must be >= 1");
  if (!(tau > 0.0)) throw DomainError("RateParams: tau must be positive");
  if (tau1 < 0.0 || tau2 < 0.0) throw DomainError("RateParams: tau1, tau2 must be nonnegative");
  if (n < 1) throw DomainError("RateParams: n must be >= 1");
}

RateResult contraction_rate(const RateParams& p) {
  p.validate();
  RateResult r;
  r.s = 1.0 + 1.0 / p.beta_smooth + 1.0 / p.tau;
  const double dd = static_cast<double>(p.d);
  r.t0 = (dd * r.s + std::max({p.tau1, 1.0, p.tau2 / p.tau})) / (2.0 + dd / p.beta_smooth);
  r.t_min = r.t0 + std::max(0.0, (1.0 - p.tau1) / 2.0);
  const double t = r.t_min * (1.0 + 1e-9);
  const double rate = p.beta_smooth / (2.0 * p.beta_smooth + dd);
  const double logn = std::log(static_cast<double>(p.n));
  r.eps_n = std::exp(-rate * logn + t * std::log(logn));
  return r;
}

std::int64_t eps_n_monotone_from(const RateParams& p) {
  p.validate();
  const RateResult r = contraction_rate(p);
  const double t = r.t_min * (1.0 + 1e-9);
  const double rate = p.beta_smooth / (2.0 * p.beta_smooth + static_cast<double>(p.d));
  // n^(-rate) (log n)^t decreases once log n > t / rate.
  return static_cast<std::int64_t>(std::ceil(std::exp(t / rate))) + 1;
}

void SieveSpec::validate() const {
  if (H < 1) throw DomainError("SieveSpec: H must be >= 1");
  if (!(sigma_lo > 0.0) || !(sigma_lo <= sigma_hi))
    throw DomainError("SieveSpec: need 0 < sigma_lo <= sigma_hi");
  if (!(sigma_lo <= 1.0)) throw DomainError("SieveSpec: sigma_lo must be <= 1");
  if (!(mu_bar > 0.0)) throw DomainError("SieveSpec: mu_bar must be positive");
  if (!(alpha_floor > 0.0 && alpha_floor <= 0.5))
    throw DomainError("SieveSpec: alpha_floor must lie in (0, 1/2]");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("SieveSpec: eps must lie in (0, 1)");
  if (d_y < 1 || d_x < 1) throw DomainError("SieveSpec: dimensions must be >= 1");
}

CoveringBound sieve_covering_bound(const SieveSpec& s) {
  s.validate();
  const double H = static_cast<double>(s.H);
  const double c1 = std::ceil(16.0 * s.mu_bar * s.d_y / (s.sigma_lo * s.eps));
  const double c2 = std::ceil(48.0 * s.d_x / (s.sigma_lo * s.sigma_lo * s.eps));
  const double c3 = std::ceil(std::log(1.0 / s.alpha_floor) / std::log1p(s.eps / (12.0 * H)));
  // The scale grid over [sigma_lo, sigma_hi] needs at least one point even
  // when the interval is degenerate (sigma_hi == sigma_lo gives ceil(0) = 0).
  const double c4 = std::max(
      1.0, std::ceil(std::log(s.sigma_hi / s.sigma_lo) /
                     std::log1p(s.sigma_lo * s.sigma_lo * s.eps /
                                (48.0 * std::max(s.d_x, s.d_y)))));

  CoveringBound b;
  b.log_factors[0] = std::log(H);
  b.log_factors[1] = pow_log(c1, H * s.d_y);
  b.log_factors[2] = pow_log(c2, H * s.d_x);
  b.log_factors[3] = std::log(H) + pow_log(c3, H - 1.0);
  b.log_factors[4] = std::log(c4);
  b.log_value = 0.0;
  for (double lf : b.log_factors) b.log_value += lf;

  // Exact integer product when it fits a 53-bit mantissa.
  if (b.log_value <= 52.0 * std::log(2.0)) {
    long double prod = H;
    auto mul_pow = [&](double base, long long e) {
      for (long long i = 0; i < e; ++i) prod *= static_cast<long double>(base);
    };
    mul_pow(c1, static_cast<long long>(s.H) * s.d_y);
    mul_pow(c2, static_cast<long long>(s.H) * s.d_x);
    prod *= H;
    mul_pow(c3, s.H - 1);
    prod *= static_cast<long double>(c4);
    b.value = static_cast<double>(prod);
  }
  return b;
}

ComplementBound sieve_complement_bound(const SieveSpec& s,
                                       const PriorConditionConstants& constants, double a) {
  s.validate();
  constants.validate();
  if (s.H < 2) throw DomainError("sieve_complement_bound: H must be >= 2");
  if (!(a > 0.0)) throw DomainError("sieve_complement_bound: a must be positive");
  const double H = static_cast<double>(s.H);
  ComplementBound b;
  b.terms[0] = H * H * std::exp(-constants.a13 * std::pow(s.mu_bar, constants.tau3));
  b.terms[1] = H * H * std::pow(s.alpha_floor, a / H);
  b.terms[2] = std::exp(-constants.a10 * H * std::pow(std::log(H), constants.tau1));
  b.terms[3] = constants.a1 * std::exp(-constants.a2 * std::pow(s.sigma_lo, -2.0 * constants.a3));
  b.terms[4] = constants.a4 * std::exp(-2.0 * constants.a5 * std::log(s.sigma_hi));
  b.total = 0.0;
  for (double t : b.terms) b.total += t;
  return b;
}

ComplementEstimate mc_sieve_complement(const SieveSpec& s, const PriorHyper& hyper, int m_max,
                                       int n_mc, Rng& rng) {
  s.validate();
  if (n_mc < 1) throw DomainError("mc_sieve_complement: n_mc must be >= 1");
  long outside = 0;
  for (int i = 0; i < n_mc; ++i) {
    const MixtureTheta t = sample_prior(hyper, m_max, rng);
    bool out = t.m > s.H;
    if (!out && t.weights.minCoeff() < s.alpha_floor) out = true;
    if (!out && (t.sigma_y < s.sigma_lo || t.sigma_y > s.sigma_hi)) out = true;
    if (!out) {
      for (const Component& c : t.comp) {
        if (std::abs(c.beta[0]) > s.mu_bar) {
          out = true;
          break;
        }
      }
    }
    if (out) ++outside;
  }
  ComplementEstimate e;
  e.n_mc = n_mc;
  e.estimate = static_cast<double>(outside) / n_mc;
  e.se = std::sqrt(std::max(e.estimate * (1.0 - e.estimate), 1.0 / n_mc) / n_mc);
  return e;
}

LemmaA1Result check_lemma_a1(const CondDensity& f0, const CondDensity& f,
                             const CovariateDensity& g0, const CovariateDensity& u,
                             const CovariateDensity& g, double g_bar, double u_floor, int d_x,
                             const YQuad& quad, int x_nodes, double tol) {
  if (d_x < 1) throw DomainError("check_lemma_a1: d_x must be >= 1");
  if (!(g_bar > 0.0) || !(u_floor > 0.0))
    throw DomainError("check_lemma_a1: g_bar and u_floor must be positive");

  Eigen::VectorXd ynodes, yweights;
  mapped_rule(quad.lo, quad.hi, quad.nodes, ynodes, yweights);

  std::vector<Eigen::VectorXd> xn(d_x), xw(d_x);
  for (int k = 0; k < d_x; ++k) mapped_rule(0.0, 1.0, x_nodes, xn[k], xw[k]);

  double lhs = 0.0, core = 0.0;
  Eigen::VectorXd x(d_x);
  std::vector<int> idx(d_x, 0);
  while (true) {
    double wx = 1.0;
    for (int k = 0; k < d_x; ++k) {
      x[k] = xn[k][idx[k]];
      wx *= xw[k][idx[k]];
    }
    const Eigen::VectorXd a = f0(x, ynodes);
    const Eigen::VectorXd b = f(x, ynodes);
    const double gx0 = g0(x);
    const double ux = u(x);
    const double gx = g(x);
    double inner_h = 0.0, inner_c = 0.0;
    for (Eigen::Index q = 0; q < ynodes.size(); ++q) {
      const double sa = std::sqrt(std::max(a[q], 0.0));
      const double sb = std::sqrt(std::max(b[q], 0.0));
      const double dh = sa - sb;
      inner_h += yweights[q] * dh * dh;
      const double dj = sa * std::sqrt(std::max(ux, 0.0)) - sb * std::sqrt(std::max(gx, 0.0));
      inner_c += yweights[q] * dj * dj;
    }
    lhs += wx * gx0 * inner_h;
    core += wx * inner_c;

    int k = d_x - 1;
    while (k >= 0 && ++idx[k] == x_nodes) idx[k--] = 0;
    if (k < 0) break;
  }

  LemmaA1Result r;
  r.lhs = lhs;
  r.rhs = 4.0 * g_bar / u_floor * core;
  r.margin = r.rhs - r.lhs;
  r.pass = r.margin >= -tol;
  return r;
}

RateStudyResult empirical_rate_study(
    const std::vector<std::pair<double, std::vector<double>>>& mae_by_n, int n_bootstrap,
    std::uint64_t seed) {
  std::vector<double> distinct;
  for (const auto& [n, maes] : mae_by_n) {
    if (!(n > 0.0)) throw DomainError("empirical_rate_study: n values must be positive");
    if (maes.empty()) throw DomainError("empirical_rate_study: empty replicate list");
    if (std::find(distinct.begin(), distinct.end(), n) == distinct.end()) distinct.push_back(n);
  }
  if (distinct.size() < 3)
    throw DomainError("empirical_rate_study: need at least 3 distinct n values");

  const int g = static_cast<int>(mae_by_n.size());
  RateStudyResult r;
  r.log_n.resize(g);
  r.log_mean_mae.resize(g);
  for (int i = 0; i < g; ++i) {
    const auto& [n, maes] = mae_by_n[i];
    double mean = 0.0;
    for (double v : maes) mean += v;
    mean /= static_cast<double>(maes.size());
    if (!(mean > 0.0)) throw DomainError("empirical_rate_study: nonpositive mean MAE");
    r.log_n[i] = std::log(n);
    r.log_mean_mae[i] = std::log(mean);
  }
  r.slope = simple_ols_slope(r.log_n, r.log_mean_mae, &r.intercept);

  if (n_bootstrap > 0) {
    std::vector<double> slopes(static_cast<size_t>(n_bootstrap));
    for (int b = 0; b < n_bootstrap; ++b) {
      Rng rng = make_rng(seed, static_cast<std::uint64_t>(b) + 1);
      Eigen::VectorXd ly(g), lm(g);
      bool ok = true;
      for (int i = 0; i < g; ++i) {
        const auto& maes = mae_by_n[i].second;
        std::uniform_int_distribution<size_t> pick(0, maes.size() - 1);
        double mean = 0.0;
        for (size_t j = 0; j < maes.size(); ++j) mean += maes[pick(rng)];
        mean /= static_cast<double>(maes.size());
        if (!(mean > 0.0)) {
          ok = false;
          break;
        }
        ly[i] = r.log_n[i];
        lm[i] = std::log(mean);
      }
      slopes[static_cast<size_t>(b)] = ok ? simple_ols_slope(ly, lm, nullptr) : r.slope;
    }
    std::sort(slopes.begin(), slopes.end());
    const auto pick_q = [&](double q) {
      const double h = (static_cast<double>(slopes.size()) - 1.0) * q;
      const size_t lo = static_cast<size_t>(h);
      const size_t hi = std::min(lo + 1, slopes.size() - 1);
      return slopes[lo] + (h - static_cast<double>(lo)) * (slopes[hi] - slopes[lo]);
    };
    r.slope_lo = pick_q(0.025);
    r.slope_hi = pick_q(0.975);
  } else {
    r.slope_lo = r.slope_hi = r.slope;
  }
  return r;
}

}  // namespace mixcde
