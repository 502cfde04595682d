#include "mixcde/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "mixcde/errors.hpp"

namespace mixcde {

namespace {

// Golub-Welsch: nodes are eigenvalues of the symmetric tridiagonal Jacobi
// matrix for Legendre polynomials, weights are 2 * (first eigenvector row)^2.
// The matrix is already tridiagonal, so skip the dense Householder reduction.
GaussLegendre compute_rule(int n) {
  if (n < 1) throw DomainError("GaussLegendre::rule: n must be >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    sub[k - 1] = kk / std::sqrt(4.0 * kk * kk - 1.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw Error("GaussLegendre::rule: tridiagonal eigensolve failed");
  GaussLegendre r;
  r.nodes = es.eigenvalues();
  r.weights = 2.0 * es.eigenvectors().row(0).transpose().array().square();
  return r;
}

}  // namespace

const GaussLegendre& GaussLegendre::rule(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::make_unique<GaussLegendre>(compute_rule(n))).first;
  }
  return *it->second;
}

void mapped_rule(double a, double b, int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  const GaussLegendre& r = GaussLegendre::rule(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  nodes = (r.nodes.array() * half + mid).matrix();
  weights = r.weights * half;
}

double integrate(const std::function<double(double)>& f, double a, double b, int n) {
  Eigen::VectorXd nodes, weights;
  mapped_rule(a, b, n, nodes, weights);
  double s = 0.0;
  for (Eigen::Index i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
  return s;
}

Eigen::VectorXd integrate_vector(const std::function<Eigen::VectorXd(double)>& f, double a,
                                 double b, int n) {
  Eigen::VectorXd nodes, weights;
  mapped_rule(a, b, n, nodes, weights);
  Eigen::VectorXd acc;
  for (Eigen::Index i = 0; i < nodes.size(); ++i) {
    Eigen::VectorXd v = f(nodes[i]);
    if (i == 0)
      acc = weights[i] * v;
    else
      acc += weights[i] * v;
  }
  return acc;
}

}  // namespace mixcde
