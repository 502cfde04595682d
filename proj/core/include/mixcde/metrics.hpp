#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "mixcde/mixture.hpp"
#include "mixcde/rng.hpp"

namespace mixcde {

// Conditional density evaluator: values of f(y|x) at each entry of ys.
using CondDensity =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& ys)>;

// Joint density evaluator p(y, x).
using JointDensity = std::function<double(double y, const Eigen::VectorXd& x)>;

// Evaluation grid: equally spaced y values crossed with a list of covariate
// points.
struct EvalGrid {
  Eigen::VectorXd ys;
  std::vector<Eigen::VectorXd> xs;

  void validate() const;

  // n_y equally spaced points over the dataset's observed y range crossed
  // with {0.1, 0.5, 0.9}^(d_x). Covariate points are ordered with the last
  // coordinate varying fastest.
  static EvalGrid default_grid(const Dataset& data, int n_y = 100);
};

// Mean absolute difference between the two evaluators over the grid.
double mae(const CondDensity& estimate, const CondDensity& truth, const EvalGrid& grid);

// Inner y-integration window and node count for the distance calculators.
struct YQuad {
  double lo = -1.0;
  double hi = 1.0;
  int nodes = 512;
};

// Covariate-integrated Hellinger distance:
//   d_h = sqrt( E_{x~g0} Int (sqrt f1 - sqrt f2)^2 dy ),
// outer expectation by Monte Carlo over n_x draws from g0_sampler, inner
// integral by Gauss-Legendre on [quad.lo, quad.hi]. Lies in [0, sqrt(2)] up
// to MC error.
double hellinger_dh(const CondDensity& f1, const CondDensity& f2,
                    const std::function<Eigen::VectorXd(Rng&)>& g0_sampler, int n_x,
                    const YQuad& quad, Rng& rng);

// Covariate-integrated total variation distance E_{x~g0} Int |f1 - f2| dy,
// in [0, 2].
double tv_d1(const CondDensity& f1, const CondDensity& f2,
             const std::function<Eigen::VectorXd(Rng&)>& g0_sampler, int n_x, const YQuad& quad,
             Rng& rng);

// Hellinger distance between joint densities over y in [quad.lo, quad.hi]
// and x in the box [x_lo, x_hi], by tensor-product Gauss-Legendre quadrature
// with x_nodes points per covariate dimension.
double joint_hellinger_dH(const JointDensity& p1, const JointDensity& p2, const YQuad& quad,
                          const Eigen::VectorXd& x_lo, const Eigen::VectorXd& x_hi,
                          int x_nodes = 64);

}  // namespace mixcde
