#pragma once

#include <Eigen/Core>
#include <functional>

namespace mixcde {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  // Returns the n-point rule; rules are computed once and cached (thread safe).
  static const GaussLegendre& rule(int n);
};

// Integrates f over [a, b] with the n-point Gauss-Legendre rule.
double integrate(const std::function<double(double)>& f, double a, double b, int n = 512);

// Integrates a vector-valued integrand over [a, b]; returns the vector of
// integrals. `f` maps a scalar to a vector of fixed size.
Eigen::VectorXd integrate_vector(const std::function<Eigen::VectorXd(double)>& f, double a,
                                 double b, int n = 512);

// Nodes/weights for the same rule mapped onto [a, b].
void mapped_rule(double a, double b, int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

}  // namespace mixcde
