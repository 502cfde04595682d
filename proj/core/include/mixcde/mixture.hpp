#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mixcde {

// One mixture component of the covariate-dependent model:
//   response density  phi(y; x~' beta, (sigma_y * s_y)^2)   with x~ = (1, x),
//   gate kernel       exp{-0.5 * sum_k (x_k - mu_x[k])^2 / (sigma_x[k]*s_x[k])^2}.
struct Component {
  Eigen::VectorXd beta;  // length d_x + 1, beta[0] is the intercept
  Eigen::VectorXd mu_x;  // length d_x
  double s_y = 1.0;
  Eigen::VectorXd s_x;  // length d_x
};

struct MixtureTheta {
  int m = 0;
  Eigen::VectorXd weights;  // length m, simplex
  std::vector<Component> comp;
  double sigma_y = 1.0;
  Eigen::VectorXd sigma_x;  // length d_x

  int d_x() const { return static_cast<int>(sigma_x.size()); }

  // Throws DimensionError/DomainError if any invariant fails: weights on the
  // simplex within 1e-12, scales strictly positive, consistent d_x, finite.
  void validate() const;

  // Mixture of normals with location-only means, unit local scales, and one
  // global scale per coordinate: component j has intercept mu_y[j], zero
  // slopes, gate location mu_x.row(j).
  static MixtureTheta basic(const Eigen::VectorXd& weights, const Eigen::VectorXd& mu_y,
                            const Eigen::MatrixXd& mu_x, double sigma_y,
                            const Eigen::VectorXd& sigma_x);
};

struct DatasetMeta {
  std::uint64_t seed = 0;
  std::string dgp;
};

struct Dataset {
  Eigen::VectorXd y;  // length n
  Eigen::MatrixXd x;  // n x d_x
  std::optional<DatasetMeta> meta;

  int n() const { return static_cast<int>(y.size()); }
  int d_x() const { return static_cast<int>(x.cols()); }

  // Throws on row-count mismatch or non-finite entries. n = 0 is permitted
  // (an empty dataset makes the likelihood identically 1).
  void validate() const;
};

// Conditional density p(y | x, theta) at each entry of ys. Gate weights are
// formed in log domain, so far-away gate locations cannot underflow to 0/0.
Eigen::VectorXd eval_conditional_density(const MixtureTheta& theta, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& ys);

// Sum over observations of log p(y_i | x_i, theta). Returns -infinity if any
// observation has zero density; throws on dimension mismatch or non-finite
// data. An empty dataset yields 0.
double eval_log_likelihood(const MixtureTheta& theta, const Dataset& data);

// Joint density sum_j alpha_j * N(y; x~'beta_j, (sigma_y s_y)^2)
//                          * prod_k N(x_k; mu_x[k], (sigma_x[k] s_x[k])^2).
// For location-only components this is the joint mixture whose conditional
// in y reproduces eval_conditional_density.
double eval_joint_density(const MixtureTheta& theta, double y, const Eigen::VectorXd& x);

struct PredictiveSummary {
  Eigen::VectorXd mean;                 // length ys.size()
  std::vector<Eigen::VectorXd> curves;  // one per requested quantile
  std::vector<double> quantiles;
};

// Pointwise draw-average and empirical quantile curves of the conditional
// density across posterior draws. Quantiles use linear interpolation of order
// statistics. Throws on an empty draw list or quantiles outside (0, 1).
PredictiveSummary posterior_predictive(const std::vector<MixtureTheta>& draws,
                                       const Eigen::VectorXd& x, const Eigen::VectorXd& ys,
                                       const std::vector<double>& quantiles);

// Interpolated empirical quantile (same convention as posterior_predictive)
// of the values in v, p in (0, 1).
double empirical_quantile(Eigen::VectorXd v, double p);

namespace detail {

// Gate log-kernels for observation rows of `x`: K(i, j) = log of the j-th
// component's unnormalized gate kernel at x.row(i), excluding log alpha_j.
void fill_gate_column(const MixtureTheta& theta, const Eigen::MatrixXd& x, int j,
                      Eigen::Ref<Eigen::VectorXd> out);

// Response log-densities: R(i, j) = log N(y_i; x~_i' beta_j, (sigma_y s_y_j)^2).
void fill_resp_column(const MixtureTheta& theta, const Eigen::VectorXd& y,
                      const Eigen::MatrixXd& x, int j, Eigen::Ref<Eigen::VectorXd> out);

// Log-likelihood assembled from cached gate/response columns:
//   sum_i [ LSE_j(log a_j + K_ij + R_ij) - LSE_j(log a_j + K_ij) ].
double loglik_from_columns(const Eigen::VectorXd& log_weights, const Eigen::MatrixXd& gate,
                           const Eigen::MatrixXd& resp);

}  // namespace detail

}  // namespace mixcde
