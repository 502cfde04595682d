#include "mixcde/prior.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "mixcde/distributions.hpp"
#include "mixcde/errors.hpp"

namespace mixcde {

namespace {

void check_spd(const Eigen::MatrixXd& mat, const char* name) {
  if (mat.rows() != mat.cols()) throw DimensionError(std::string(name) + ": not square");
  if (mat.rows() == 0) return;
  if (!mat.isApprox(mat.transpose(), 1e-10)) throw DomainError(std::string(name) + ": not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(mat);
  if (llt.info() != Eigen::Success)
    throw DomainError(std::string(name) + ": not positive definite");
}

void check_gamma(const GammaPair& g, const char* name) {
  if (!(g.shape > 0.0) || !(g.rate > 0.0))
    throw DomainError(std::string(name) + ": shape and rate must be positive");
}

// Density of the positive variable s when s^-2 ~ Gamma(shape, rate):
// p(s) = Gamma_pdf(s^-2) * 2 s^-3.
double log_invsq_gamma_pdf(double s, const GammaPair& g) {
  if (!(s > 0.0)) return kNegInf;
  return log_gamma_pdf(1.0 / (s * s), g.shape, g.rate) + std::log(2.0) - 3.0 * std::log(s);
}

// Density of sigma when sigma^-1 ~ Gamma(shape, rate): p(sigma) =
// Gamma_pdf(sigma^-1) * sigma^-2.
double log_inv_gamma_draw_pdf(double sigma, const GammaPair& g) {
  if (!(sigma > 0.0)) return kNegInf;
  return log_gamma_pdf(1.0 / sigma, g.shape, g.rate) - 2.0 * std::log(sigma);
}

double population_variance(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size());
}

}  // namespace

void PriorHyper::validate() const {
  const int d = d_x();
  if (beta_mean.size() != d + 1) throw DimensionError("PriorHyper: beta_mean size != d_x + 1");
  if (beta_prec.rows() != d + 1) throw DimensionError("PriorHyper: beta_prec size != d_x + 1");
  if (mu_prec.rows() != d) throw DimensionError("PriorHyper: mu_prec size != d_x");
  if (static_cast<int>(sigma_x_inv.size()) != d)
    throw DimensionError("PriorHyper: sigma_x_inv size != d_x");
  check_spd(beta_prec, "PriorHyper beta_prec");
  check_spd(mu_prec, "PriorHyper mu_prec");
  check_gamma(s_y_prec2, "PriorHyper s_y_prec2");
  check_gamma(s_x_prec2, "PriorHyper s_x_prec2");
  check_gamma(sigma_y_inv, "PriorHyper sigma_y_inv");
  for (const GammaPair& g : sigma_x_inv) check_gamma(g, "PriorHyper sigma_x_inv");
  if (!(a > 0.0)) throw DomainError("PriorHyper: a must be positive");
  if (!(A_m > 0.0)) throw DomainError("PriorHyper: A_m must be positive");
}

void PriorConditionConstants::validate() const {
  const double vals[] = {a1, a2, a3, a4, a5, a6, a7, a8, a9, a10, a11,
                         a12, a13, a14, a15, a16, tau1, tau2, tau3, tau4, tau5};
  for (double v : vals)
    if (!(v > 0.0)) throw DomainError("PriorConditionConstants: all constants must be positive");
}

PriorHyper derive_hyperparameters(const Dataset& data, double c_beta, double c_sigma, double c_s,
                                  double a, double A_m) {
  data.validate();
  const int n = data.n();
  const int d = data.d_x();
  if (n <= d + 1) throw DomainError("derive_hyperparameters: need n > d_x + 1");
  if (!(c_beta > 0.0) || !(c_sigma > 0.0) || !(c_s > 0.0) || !(a > 0.0) || !(A_m > 0.0))
    throw DomainError("derive_hyperparameters: constants must be positive");

  Eigen::MatrixXd design(n, d + 1);
  design.col(0).setOnes();
  if (d > 0) design.rightCols(d) = data.x;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < d + 1) {
    const int col = qr.colsPermutation().indices()[qr.rank()];
    throw RankError("derive_hyperparameters: design matrix is rank deficient", col);
  }

  PriorHyper h;
  h.c_beta = c_beta;
  h.c_sigma = c_sigma;
  h.c_s = c_s;
  h.a = a;
  h.A_m = A_m;

  h.beta_mean = qr.solve(data.y);
  const double rss = (data.y - design * h.beta_mean).squaredNorm();
  const double var_y = population_variance(data.y);
  const double rss_n = std::max(rss / n, 1e-12 * var_y + 1e-300);

  h.beta_prec = (design.transpose() * design) / (c_beta * rss_n);

  h.mu_mean = d > 0 ? Eigen::VectorXd(data.x.colwise().mean().transpose())
                    : Eigen::VectorXd(0);
  if (d > 0) {
    Eigen::MatrixXd centered = data.x.rowwise() - h.mu_mean.transpose();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw DomainError("derive_hyperparameters: covariate covariance not positive definite");
    h.mu_prec = llt.solve(Eigen::MatrixXd::Identity(d, d));
    // Symmetrize against round-off from the solve.
    h.mu_prec = ((h.mu_prec + h.mu_prec.transpose()) * 0.5).eval();
  } else {
    h.mu_prec = Eigen::MatrixXd(0, 0);
  }

  h.s_y_prec2 = {c_s, c_s};
  h.s_x_prec2 = {c_s, c_s};
  h.sigma_y_inv = {c_sigma / rss_n, c_sigma / std::sqrt(rss_n)};
  h.sigma_x_inv.resize(d);
  for (int k = 0; k < d; ++k) {
    const double v = population_variance(data.x.col(k));
    h.sigma_x_inv[k] = {c_sigma / v, c_sigma / std::sqrt(v)};
  }
  h.validate();
  return h;
}

Eigen::VectorXd truncated_m_pmf(double A_m, int m_max) {
  if (m_max < 1) throw DomainError("truncated_m_pmf: m_max must be >= 1");
  if (!(A_m > 0.0)) throw DomainError("truncated_m_pmf: A_m must be positive");
  Eigen::VectorXd p(m_max);
  for (int k = 1; k <= m_max; ++k) p[k - 1] = std::exp(-A_m * k);
  return p / p.sum();
}

int sample_m(double A_m, int m_max, Rng& rng) {
  const Eigen::VectorXd pmf = truncated_m_pmf(A_m, m_max);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double u = u01(rng);
  for (int k = 0; k < m_max; ++k) {
    u -= pmf[k];
    if (u <= 0.0) return k + 1;
  }
  return m_max;
}

Component sample_component(const PriorHyper& hyper, Rng& rng) {
  const int d = hyper.d_x();
  Component c;
  c.beta = sample_mvn_precision(hyper.beta_mean, hyper.beta_prec, rng);
  c.mu_x = d > 0 ? sample_mvn_precision(hyper.mu_mean, hyper.mu_prec, rng)
                 : Eigen::VectorXd(0);
  c.s_y = 1.0 / std::sqrt(sample_gamma(hyper.s_y_prec2.shape, hyper.s_y_prec2.rate, rng));
  c.s_x.resize(d);
  for (int k = 0; k < d; ++k)
    c.s_x[k] = 1.0 / std::sqrt(sample_gamma(hyper.s_x_prec2.shape, hyper.s_x_prec2.rate, rng));
  return c;
}

double log_component_prior(const Component& c, const PriorHyper& hyper) {
  const int d = hyper.d_x();
  if (c.beta.size() != d + 1 || c.mu_x.size() != d || c.s_x.size() != d)
    throw DimensionError("log_component_prior: component dimensions disagree with hyper");
  if (!(c.s_y > 0.0) || (d > 0 && c.s_x.minCoeff() <= 0.0)) return kNegInf;
  double lp = log_mvn_precision_pdf(c.beta, hyper.beta_mean, hyper.beta_prec);
  if (d > 0) lp += log_mvn_precision_pdf(c.mu_x, hyper.mu_mean, hyper.mu_prec);
  lp += log_invsq_gamma_pdf(c.s_y, hyper.s_y_prec2);
  for (int k = 0; k < d; ++k) lp += log_invsq_gamma_pdf(c.s_x[k], hyper.s_x_prec2);
  return lp;
}

MixtureTheta sample_prior(const PriorHyper& hyper, int m_max, Rng& rng) {
  hyper.validate();
  const int d = hyper.d_x();
  MixtureTheta t;
  t.m = sample_m(hyper.A_m, m_max, rng);
  t.weights = sample_dirichlet(Eigen::VectorXd::Constant(t.m, hyper.a / t.m), rng);
  t.comp.reserve(t.m);
  for (int j = 0; j < t.m; ++j) t.comp.push_back(sample_component(hyper, rng));
  t.sigma_y = 1.0 / sample_gamma(hyper.sigma_y_inv.shape, hyper.sigma_y_inv.rate, rng);
  t.sigma_x.resize(d);
  for (int k = 0; k < d; ++k)
    t.sigma_x[k] = 1.0 / sample_gamma(hyper.sigma_x_inv[k].shape, hyper.sigma_x_inv[k].rate, rng);
  t.validate();
  return t;
}

double log_prior_density(const MixtureTheta& theta, const PriorHyper& hyper, int m_max) {
  if (theta.d_x() != hyper.d_x())
    throw DimensionError("log_prior_density: theta d_x != hyper d_x");
  if (theta.m < 1 || theta.m > m_max) return kNegInf;
  if (!(theta.sigma_y > 0.0)) return kNegInf;
  const int d = theta.d_x();
  for (int k = 0; k < d; ++k)
    if (!(theta.sigma_x[k] > 0.0)) return kNegInf;

  const Eigen::VectorXd pmf = truncated_m_pmf(hyper.A_m, m_max);
  double lp = std::log(pmf[theta.m - 1]);
  lp += log_dirichlet_pdf(theta.weights,
                          Eigen::VectorXd::Constant(theta.m, hyper.a / theta.m));
  for (const Component& c : theta.comp) lp += log_component_prior(c, hyper);
  lp += log_inv_gamma_draw_pdf(theta.sigma_y, hyper.sigma_y_inv);
  for (int k = 0; k < d; ++k)
    lp += log_inv_gamma_draw_pdf(theta.sigma_x[k], hyper.sigma_x_inv[k]);
  return lp;
}

BetaTailResult beta_tail_check(double a, int m, double alpha_floor, int n_mc, Rng& rng) {
  if (!(alpha_floor > 0.0 && alpha_floor <= 0.5))
    throw DomainError("beta_tail_check: alpha_floor must lie in (0, 1/2]");
  if (m < 2) throw DomainError("beta_tail_check: m must be >= 2");
  if (n_mc < 1) throw DomainError("beta_tail_check: n_mc must be >= 1");

  // First coordinate of Dirichlet(a/m, ..., a/m) is Beta(a/m, a(m-1)/m).
  long hits = 0;
  for (int i = 0; i < n_mc; ++i) {
    const double alpha1 = sample_beta(a / m, a * (m - 1) / m, rng);
    if (alpha1 < alpha_floor) ++hits;
  }
  BetaTailResult r;
  r.mc_estimate = static_cast<double>(hits) / n_mc;
  r.mc_se = std::sqrt(std::max(r.mc_estimate * (1.0 - r.mc_estimate), 1.0 / n_mc) / n_mc);
  // 2 e^2 Gamma(a+1) alpha_floor^(a/m), assembled in log space.
  r.bound = std::exp(std::log(2.0) + 2.0 + std::lgamma(a + 1.0) +
                     (a / m) * std::log(alpha_floor));
  r.pass = r.mc_estimate <= r.bound + 3.0 * r.mc_se;
  return r;
}

SigmaAuditReport audit_sigma_conditions(const PriorConditionConstants& constants,
                                        const std::function<double(Rng&)>& sigma_sampler,
                                        const std::vector<double>& s_grid,
                                        const std::vector<double>& t_grid, int n_mc, Rng& rng) {
  constants.validate();
  if (s_grid.empty()) throw DomainError("audit_sigma_conditions: empty s grid");
  if (n_mc < 1) throw DomainError("audit_sigma_conditions: n_mc must be >= 1");
  for (double t : t_grid)
    if (!(t > 0.0 && t < 1.0))
      throw DomainError("audit_sigma_conditions: t values must lie in (0, 1)");

  std::vector<double> prec2(static_cast<size_t>(n_mc));
  for (double& v : prec2) {
    const double sigma = sigma_sampler(rng);
    if (!(sigma > 0.0)) throw DomainError("audit_sigma_conditions: sampler returned sigma <= 0");
    v = 1.0 / (sigma * sigma);
  }
  std::sort(prec2.begin(), prec2.end());

  auto frac_ge = [&](double s) {
    const auto it = std::lower_bound(prec2.begin(), prec2.end(), s);
    return static_cast<double>(prec2.end() - it) / n_mc;
  };
  auto binom_se = [&](double p) {
    return std::sqrt(std::max(p * (1.0 - p), 1.0 / n_mc) / n_mc);
  };

  SigmaAuditReport rep;
  rep.n_mc = n_mc;
  for (double s : s_grid) {
    if (!(s > 0.0)) throw DomainError("audit_sigma_conditions: s values must be positive");
    SigmaTailPoint tp;
    tp.s = s;
    tp.p_upper = frac_ge(s);
    tp.p_upper_se = binom_se(tp.p_upper);
    tp.bound_upper = constants.a1 * std::exp(-constants.a2 * std::pow(s, constants.a3));
    tp.pass_upper = tp.p_upper <= tp.bound_upper + 3.0 * tp.p_upper_se;
    tp.p_lower = 1.0 - tp.p_upper;
    tp.p_lower_se = binom_se(tp.p_lower);
    tp.bound_lower = constants.a4 * std::pow(s, constants.a5);
    tp.pass_lower = tp.p_lower <= tp.bound_lower + 3.0 * tp.p_lower_se;
    rep.tails.push_back(tp);

    for (double t : t_grid) {
      SigmaBandPoint bp;
      bp.s = s;
      bp.t = t;
      bp.p = frac_ge(s) - frac_ge(s * (1.0 + t));
      // Interval is open at s; the discrete correction is below MC noise.
      bp.se = binom_se(bp.p);
      bp.bound = constants.a6 * std::pow(s, constants.a7) * std::pow(t, constants.a8) *
                 std::exp(-constants.a9 * std::sqrt(s));
      bp.pass = bp.p >= bp.bound - 3.0 * bp.se;
      rep.bands.push_back(bp);
    }
  }
  return rep;
}

}  // namespace mixcde
