#include "mixcde/mixture.hpp"

#include <algorithm>
#include <cmath>

#include "mixcde/distributions.hpp"
#include "mixcde/errors.hpp"

namespace mixcde {

namespace {

double logsumexp(const Eigen::VectorXd& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;  // all -inf (or a NaN propagates)
  double s = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) s += std::exp(v[j] - mx);
  return mx + std::log(s);
}

}  // namespace

void MixtureTheta::validate() const {
  if (m < 1) throw DomainError("MixtureTheta: m must be >= 1");
  if (weights.size() != m) throw DimensionError("MixtureTheta: weights size != m");
  if (static_cast<int>(comp.size()) != m) throw DimensionError("MixtureTheta: comp size != m");
  if (!weights.allFinite() || weights.minCoeff() < 0.0)
    throw DomainError("MixtureTheta: weights must be finite and nonnegative");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw DomainError("MixtureTheta: weights must sum to 1 within 1e-12");
  const int d = d_x();
  if (!(sigma_y > 0.0) || !std::isfinite(sigma_y))
    throw DomainError("MixtureTheta: sigma_y must be positive");
  if (!sigma_x.allFinite() || (d > 0 && sigma_x.minCoeff() <= 0.0))
    throw DomainError("MixtureTheta: sigma_x must be positive");
  for (const Component& c : comp) {
    if (c.beta.size() != d + 1) throw DimensionError("MixtureTheta: beta size != d_x + 1");
    if (c.mu_x.size() != d) throw DimensionError("MixtureTheta: mu_x size != d_x");
    if (c.s_x.size() != d) throw DimensionError("MixtureTheta: s_x size != d_x");
    if (!c.beta.allFinite() || !c.mu_x.allFinite())
      throw DomainError("MixtureTheta: non-finite component parameters");
    if (!(c.s_y > 0.0) || !std::isfinite(c.s_y))
      throw DomainError("MixtureTheta: s_y must be positive");
    if (!c.s_x.allFinite() || (d > 0 && c.s_x.minCoeff() <= 0.0))
      throw DomainError("MixtureTheta: s_x must be positive");
  }
}

MixtureTheta MixtureTheta::basic(const Eigen::VectorXd& weights, const Eigen::VectorXd& mu_y,
                                 const Eigen::MatrixXd& mu_x, double sigma_y,
                                 const Eigen::VectorXd& sigma_x) {
  const int m = static_cast<int>(weights.size());
  if (mu_y.size() != m || mu_x.rows() != m)
    throw DimensionError("MixtureTheta::basic: component counts disagree");
  if (mu_x.cols() != sigma_x.size())
    throw DimensionError("MixtureTheta::basic: covariate dimensions disagree");
  const int d = static_cast<int>(sigma_x.size());
  MixtureTheta t;
  t.m = m;
  t.weights = weights;
  t.sigma_y = sigma_y;
  t.sigma_x = sigma_x;
  t.comp.resize(m);
  for (int j = 0; j < m; ++j) {
    t.comp[j].beta = Eigen::VectorXd::Zero(d + 1);
    t.comp[j].beta[0] = mu_y[j];
    t.comp[j].mu_x = mu_x.row(j).transpose();
    t.comp[j].s_y = 1.0;
    t.comp[j].s_x = Eigen::VectorXd::Ones(d);
  }
  t.validate();
  return t;
}

void Dataset::validate() const {
  if (x.rows() != y.size()) throw DimensionError("Dataset: y and x row counts differ");
  if (!y.allFinite() || !x.allFinite()) throw DomainError("Dataset: non-finite entries");
}

namespace detail {

void fill_gate_column(const MixtureTheta& theta, const Eigen::MatrixXd& x, int j,
                      Eigen::Ref<Eigen::VectorXd> out) {
  const Component& c = theta.comp[j];
  out.setZero();
  for (int k = 0; k < theta.d_x(); ++k) {
    const double denom = theta.sigma_x[k] * c.s_x[k];
    out.array() -= 0.5 * ((x.col(k).array() - c.mu_x[k]) / denom).square();
  }
}

void fill_resp_column(const MixtureTheta& theta, const Eigen::VectorXd& y,
                      const Eigen::MatrixXd& x, int j, Eigen::Ref<Eigen::VectorXd> out) {
  const Component& c = theta.comp[j];
  const double sd = theta.sigma_y * c.s_y;
  const int d = theta.d_x();
  out = y;
  out.array() -= c.beta[0];
  if (d > 0) out.noalias() -= x * c.beta.tail(d);
  out = (-0.5 * (out.array() / sd).square() - std::log(sd) - kLogSqrt2Pi).matrix();
}

double loglik_from_columns(const Eigen::VectorXd& log_weights, const Eigen::MatrixXd& gate,
                           const Eigen::MatrixXd& resp) {
  const Eigen::Index n = gate.rows();
  const Eigen::Index m = gate.cols();
  double total = 0.0;
  Eigen::VectorXd a(m), b(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      a[j] = log_weights[j] + gate(i, j);
      b[j] = a[j] + resp(i, j);
    }
    const double v = logsumexp(b) - logsumexp(a);
    if (!std::isfinite(v)) return kNegInf;
    total += v;
  }
  return total;
}

}  // namespace detail

Eigen::VectorXd eval_conditional_density(const MixtureTheta& theta, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& ys) {
  theta.validate();
  if (x.size() != theta.d_x()) throw DimensionError("eval_conditional_density: x size != d_x");
  if (!x.allFinite() || !ys.allFinite())
    throw DomainError("eval_conditional_density: non-finite input");

  const int m = theta.m;
  Eigen::MatrixXd xrow = x.transpose();
  Eigen::VectorXd log_gate(m);
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd one(1);
    detail::fill_gate_column(theta, xrow, j, one);
    const double lw = theta.weights[j] > 0.0 ? std::log(theta.weights[j]) : kNegInf;
    log_gate[j] = lw + one[0];
  }
  const double norm = logsumexp(log_gate);

  Eigen::VectorXd out(ys.size());
  Eigen::VectorXd terms(m);
  for (Eigen::Index i = 0; i < ys.size(); ++i) {
    for (int j = 0; j < m; ++j) {
      const Component& c = theta.comp[j];
      const double mean = c.beta[0] + (theta.d_x() > 0 ? c.beta.tail(theta.d_x()).dot(x) : 0.0);
      terms[j] = log_gate[j] - norm + log_normal_pdf(ys[i], mean, theta.sigma_y * c.s_y);
    }
    out[i] = std::exp(logsumexp(terms));
  }
  return out;
}

double eval_log_likelihood(const MixtureTheta& theta, const Dataset& data) {
  theta.validate();
  data.validate();
  if (data.d_x() != theta.d_x() && data.n() > 0)
    throw DimensionError("eval_log_likelihood: dataset d_x != theta d_x");
  const int n = data.n();
  if (n == 0) return 0.0;

  const int m = theta.m;
  Eigen::MatrixXd gate(n, m), resp(n, m);
  for (int j = 0; j < m; ++j) {
    detail::fill_gate_column(theta, data.x, j, gate.col(j));
    detail::fill_resp_column(theta, data.y, data.x, j, resp.col(j));
  }
  Eigen::VectorXd logw(m);
  for (int j = 0; j < m; ++j)
    logw[j] = theta.weights[j] > 0.0 ? std::log(theta.weights[j]) : kNegInf;
  return detail::loglik_from_columns(logw, gate, resp);
}

double eval_joint_density(const MixtureTheta& theta, double y, const Eigen::VectorXd& x) {
  theta.validate();
  if (x.size() != theta.d_x()) throw DimensionError("eval_joint_density: x size != d_x");
  if (!std::isfinite(y) || !x.allFinite()) throw DomainError("eval_joint_density: non-finite input");
  const int d = theta.d_x();
  Eigen::VectorXd terms(theta.m);
  for (int j = 0; j < theta.m; ++j) {
    const Component& c = theta.comp[j];
    const double mean = c.beta[0] + (d > 0 ? c.beta.tail(d).dot(x) : 0.0);
    double lp = theta.weights[j] > 0.0 ? std::log(theta.weights[j]) : kNegInf;
    lp += log_normal_pdf(y, mean, theta.sigma_y * c.s_y);
    for (int k = 0; k < d; ++k)
      lp += log_normal_pdf(x[k], c.mu_x[k], theta.sigma_x[k] * c.s_x[k]);
    terms[j] = lp;
  }
  const double lv = logsumexp(terms);
  return std::isfinite(lv) ? std::exp(lv) : 0.0;
}

double empirical_quantile(Eigen::VectorXd v, double p) {
  if (v.size() == 0) throw DimensionError("empirical_quantile: empty sample");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("empirical_quantile: p must lie in (0, 1)");
  std::sort(v.data(), v.data() + v.size());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const Eigen::Index lo = static_cast<Eigen::Index>(std::floor(h));
  const Eigen::Index hi = std::min<Eigen::Index>(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

PredictiveSummary posterior_predictive(const std::vector<MixtureTheta>& draws,
                                       const Eigen::VectorXd& x, const Eigen::VectorXd& ys,
                                       const std::vector<double>& quantiles) {
  if (draws.empty()) throw DomainError("posterior_predictive: no draws");
  for (double q : quantiles)
    if (!(q > 0.0 && q < 1.0)) throw DomainError("posterior_predictive: quantile outside (0, 1)");

  const Eigen::Index ny = ys.size();
  const Eigen::Index nd = static_cast<Eigen::Index>(draws.size());
  Eigen::MatrixXd curves(nd, ny);
  for (Eigen::Index r = 0; r < nd; ++r)
    curves.row(r) = eval_conditional_density(draws[static_cast<size_t>(r)], x, ys).transpose();

  PredictiveSummary s;
  s.quantiles = quantiles;
  s.mean = curves.colwise().mean().transpose();
  s.curves.reserve(quantiles.size());
  for (double q : quantiles) {
    Eigen::VectorXd curve(ny);
    for (Eigen::Index i = 0; i < ny; ++i) curve[i] = empirical_quantile(curves.col(i), q);
    s.curves.push_back(std::move(curve));
  }
  return s;
}

}  // namespace mixcde
