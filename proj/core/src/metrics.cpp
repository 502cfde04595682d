#include "mixcde/metrics.hpp"

#include <cmath>

#include "mixcde/errors.hpp"
#include "mixcde/quadrature.hpp"

namespace mixcde {

namespace {

// Walks the tensor grid of x points, invoking visit(x, weight) at each node.
void tensor_walk(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int nodes_per_dim,
                 const std::function<void(const Eigen::VectorXd&, double)>& visit) {
  const int d = static_cast<int>(lo.size());
  std::vector<Eigen::VectorXd> ns(d), ws(d);
  for (int k = 0; k < d; ++k) mapped_rule(lo[k], hi[k], nodes_per_dim, ns[k], ws[k]);
  Eigen::VectorXd x(d);
  std::vector<int> idx(d, 0);
  while (true) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      x[k] = ns[k][idx[k]];
      w *= ws[k][idx[k]];
    }
    visit(x, w);
    int k = d - 1;
    while (k >= 0 && ++idx[k] == nodes_per_dim) idx[k--] = 0;
    if (k < 0) break;
  }
}

double sqrt_clamped(double v) { return std::sqrt(v > 0.0 ? v : 0.0); }

}  // namespace

void EvalGrid::validate() const {
  if (ys.size() < 1) throw DimensionError("EvalGrid: empty y grid");
  for (Eigen::Index i = 1; i < ys.size(); ++i)
    if (!(ys[i] > ys[i - 1])) throw DomainError("EvalGrid: ys must be strictly increasing");
  if (xs.empty()) throw DimensionError("EvalGrid: empty x list");
  for (const auto& x : xs)
    if (x.size() != xs.front().size()) throw DimensionError("EvalGrid: ragged x points");
}

EvalGrid EvalGrid::default_grid(const Dataset& data, int n_y) {
  if (data.n() < 2) throw DomainError("EvalGrid::default_grid: need at least 2 observations");
  if (n_y < 2) throw DomainError("EvalGrid::default_grid: need at least 2 y points");
  EvalGrid g;
  g.ys = Eigen::VectorXd::LinSpaced(n_y, data.y.minCoeff(), data.y.maxCoeff());

  const int d = data.d_x();
  const double levels[3] = {0.1, 0.5, 0.9};
  const int n_pts = static_cast<int>(std::pow(3.0, d) + 0.5);
  g.xs.reserve(n_pts);
  std::vector<int> idx(d, 0);
  for (int p = 0; p < n_pts; ++p) {
    Eigen::VectorXd x(d);
    for (int k = 0; k < d; ++k) x[k] = levels[idx[k]];
    g.xs.push_back(x);
    int k = d - 1;
    while (k >= 0 && ++idx[k] == 3) idx[k--] = 0;
  }
  g.validate();
  return g;
}

double mae(const CondDensity& estimate, const CondDensity& truth, const EvalGrid& grid) {
  grid.validate();
  double total = 0.0;
  for (const Eigen::VectorXd& x : grid.xs) {
    const Eigen::VectorXd est = estimate(x, grid.ys);
    const Eigen::VectorXd tru = truth(x, grid.ys);
    if (est.size() != grid.ys.size() || tru.size() != grid.ys.size())
      throw DimensionError("mae: evaluator returned wrong length");
    total += (est - tru).cwiseAbs().sum();
  }
  return total / (static_cast<double>(grid.ys.size()) * static_cast<double>(grid.xs.size()));
}

double hellinger_dh(const CondDensity& f1, const CondDensity& f2,
                    const std::function<Eigen::VectorXd(Rng&)>& g0_sampler, int n_x,
                    const YQuad& quad, Rng& rng) {
  if (n_x < 1) throw DomainError("hellinger_dh: n_x must be >= 1");
  Eigen::VectorXd nodes, weights;
  mapped_rule(quad.lo, quad.hi, quad.nodes, nodes, weights);
  double acc = 0.0;
  for (int i = 0; i < n_x; ++i) {
    const Eigen::VectorXd x = g0_sampler(rng);
    const Eigen::VectorXd a = f1(x, nodes);
    const Eigen::VectorXd b = f2(x, nodes);
    double inner = 0.0;
    for (Eigen::Index q = 0; q < nodes.size(); ++q) {
      const double diff = sqrt_clamped(a[q]) - sqrt_clamped(b[q]);
      inner += weights[q] * diff * diff;
    }
    if (inner < -1e-10) throw DomainError("hellinger_dh: negative inner integral");
    acc += std::max(inner, 0.0);
  }
  return std::sqrt(acc / n_x);
}

double tv_d1(const CondDensity& f1, const CondDensity& f2,
             const std::function<Eigen::VectorXd(Rng&)>& g0_sampler, int n_x, const YQuad& quad,
             Rng& rng) {
  if (n_x < 1) throw DomainError("tv_d1: n_x must be >= 1");
  Eigen::VectorXd nodes, weights;
  mapped_rule(quad.lo, quad.hi, quad.nodes, nodes, weights);
  double acc = 0.0;
  for (int i = 0; i < n_x; ++i) {
    const Eigen::VectorXd x = g0_sampler(rng);
    const Eigen::VectorXd a = f1(x, nodes);
    const Eigen::VectorXd b = f2(x, nodes);
    acc += (weights.array() * (a - b).array().abs()).sum();
  }
  return acc / n_x;
}

double joint_hellinger_dH(const JointDensity& p1, const JointDensity& p2, const YQuad& quad,
                          const Eigen::VectorXd& x_lo, const Eigen::VectorXd& x_hi,
                          int x_nodes) {
  if (x_lo.size() != x_hi.size()) throw DimensionError("joint_hellinger_dH: box size mismatch");
  if (x_nodes < 1) throw DomainError("joint_hellinger_dH: x_nodes must be >= 1");
  Eigen::VectorXd ynodes, yweights;
  mapped_rule(quad.lo, quad.hi, quad.nodes, ynodes, yweights);

  double acc = 0.0;
  tensor_walk(x_lo, x_hi, x_nodes, [&](const Eigen::VectorXd& x, double wx) {
    double inner = 0.0;
    for (Eigen::Index q = 0; q < ynodes.size(); ++q) {
      const double diff = sqrt_clamped(p1(ynodes[q], x)) - sqrt_clamped(p2(ynodes[q], x));
      inner += yweights[q] * diff * diff;
    }
    acc += wx * inner;
  });
  if (acc < -1e-10) throw DomainError("joint_hellinger_dH: negative integral");
  return std::sqrt(std::max(acc, 0.0));
}

}  // namespace mixcde
