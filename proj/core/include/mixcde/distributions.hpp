#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <random>

#include "mixcde/errors.hpp"
#include "mixcde/rng.hpp"

// Sampling and log-density helpers. All Gamma distributions here use the
// shape/rate convention: Gamma(a, b) has mean a/b.

namespace mixcde {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log sqrt(2*pi)
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

inline double normal_pdf(double x, double mean, double sd) {
  return std::exp(log_normal_pdf(x, mean, sd));
}

inline double normal_cdf(double x, double mean = 0.0, double sd = 1.0) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

// log of Gamma(shape, rate) density at x > 0.
inline double log_gamma_pdf(double x, double shape, double rate) {
  if (x <= 0.0) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

inline double log_beta_pdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return kNegInf;
  const double lognorm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  return lognorm + (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
}

inline double sample_gamma(double shape, double rate, Rng& rng) {
  std::gamma_distribution<double> g(shape, 1.0 / rate);
  return g(rng);
}

inline double sample_beta(double a, double b, Rng& rng) {
  const double x = sample_gamma(a, 1.0, rng);
  const double y = sample_gamma(b, 1.0, rng);
  return x / (x + y);
}

// Dirichlet(alpha) via normalized Gammas. With very small concentrations all
// Gamma draws can underflow to zero; retries until the sum is positive.
inline Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha, Rng& rng) {
  if (alpha.size() == 0) throw DimensionError("sample_dirichlet: empty concentration vector");
  Eigen::VectorXd w(alpha.size());
  for (int attempt = 0; attempt < 256; ++attempt) {
    for (Eigen::Index j = 0; j < alpha.size(); ++j) {
      if (!(alpha[j] > 0.0)) throw DomainError("sample_dirichlet: concentrations must be > 0");
      w[j] = sample_gamma(alpha[j], 1.0, rng);
    }
    const double s = w.sum();
    if (s > 0.0) return w / s;
  }
  throw DomainError("sample_dirichlet: repeated underflow");
}

inline double log_dirichlet_pdf(const Eigen::VectorXd& w, const Eigen::VectorXd& alpha) {
  if (w.size() != alpha.size()) throw DimensionError("log_dirichlet_pdf: size mismatch");
  if (w.size() == 1) {
    // One-dimensional simplex: a point mass at w = (1), log-density zero on
    // its support (tolerance matches the weight-sum check in validate()).
    return std::abs(w[0] - 1.0) <= 1e-12 ? 0.0 : kNegInf;
  }
  double lp = std::lgamma(alpha.sum());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w[j] <= 0.0 || w[j] >= 1.0) return kNegInf;
    lp += (alpha[j] - 1.0) * std::log(w[j]) - std::lgamma(alpha[j]);
  }
  return lp;
}

// N(mean, precision^{-1}) draw; `precision` must be symmetric positive definite.
inline Eigen::VectorXd sample_mvn_precision(const Eigen::VectorXd& mean,
                                            const Eigen::MatrixXd& precision, Rng& rng) {
  if (precision.rows() != precision.cols() || precision.rows() != mean.size())
    throw DimensionError("sample_mvn_precision: size mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw DomainError("sample_mvn_precision: precision not positive definite");
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = nd(rng);
  // x = mean + L^{-T} z gives covariance (L L^T)^{-1}.
  return mean + llt.matrixU().solve(z);
}

// log N(x; mean, precision^{-1}).
inline double log_mvn_precision_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                                    const Eigen::MatrixXd& precision) {
  if (x.size() != mean.size() || precision.rows() != x.size())
    throw DimensionError("log_mvn_precision_pdf: size mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw DomainError("log_mvn_precision_pdf: precision not positive definite");
  const Eigen::VectorXd d = x - mean;
  const double quad = d.dot(precision * d);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) logdet += std::log(llt.matrixL()(i, i));
  return -0.5 * quad + logdet - static_cast<double>(x.size()) * kLogSqrt2Pi;
}

}  // namespace mixcde
