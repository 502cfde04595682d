#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "mixcde/errors.hpp"
#include "mixcde/mixture.hpp"

namespace mixcde {

struct Bandwidths {
  double h_y = 1.0;
  Eigen::VectorXd h_x;  // one per covariate

  void validate() const;
};

struct KernelDensityResult {
  Eigen::VectorXd values;
  // Set when every gate kernel at x underflows (x far outside the data);
  // values are then zero rather than 0/0.
  bool out_of_support = false;
};

// Kernel conditional density estimate with Gaussian product kernels:
//   f(y|x) = sum_i w_i(x) N(y; y_i, h_y^2),
//   w_i(x) proportional to prod_k N(x_k; x_ik, h_x[k]^2),
// with weights normalized in log domain.
KernelDensityResult kernel_cond_density(const Dataset& data, const Bandwidths& bw,
                                        const Eigen::VectorXd& x, const Eigen::VectorXd& ys);

// Leave-one-out least-squares cross-validation criterion
//   (1/n) sum_i [ Int fhat_{-i}(y|x_i)^2 dy - 2 fhat_{-i}(y_i|x_i) ],
// with the squared-density integral in closed form through the Gaussian
// product identity Int N(y;a,h^2) N(y;b,h^2) dy = N(a-b; 0, 2h^2).
double lscv_objective(const Dataset& data, const Bandwidths& bw);

struct BandwidthSelection {
  Bandwidths bw;
  double criterion = 0.0;
  bool converged = false;
  int evals = 0;
  // Size actually used by the criterion; smaller than data.n() when
  // selection subsampled (see select_bandwidths).
  int n_used = 0;
};

// Raised when no start of the bandwidth search produced a usable criterion
// value; carries the best point seen anyway.
class BandwidthSelectionError : public Error {
 public:
  BandwidthSelectionError(const std::string& msg, BandwidthSelection best)
      : Error(msg), incumbent(std::move(best)) {}
  BandwidthSelection incumbent;
};

struct SelectOptions {
  int restarts = 4;
  std::uint64_t seed = 0;
  // Criterion cost grows as n^3; beyond this size the criterion is evaluated
  // on a seed-deterministic subsample and the result rescaled by
  // (n_sub/n)^(1/(d_x+5)).
  int max_lscv_n = 2000;
  int max_evals_per_start = 200;
};

// Multi-start Nelder-Mead minimization of lscv_objective over
// log-bandwidths. Starts on a lattice of multiples of the Silverman-style
// pilot h = 1.06 sd n^(-1/(d_x+5)); deterministic given the seed.
BandwidthSelection select_bandwidths(const Dataset& data, const SelectOptions& opt);
BandwidthSelection select_bandwidths(const Dataset& data, int restarts = 4,
                                     std::uint64_t seed = 0);

}  // namespace mixcde
