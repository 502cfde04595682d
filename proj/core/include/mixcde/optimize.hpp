#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "mixcde/errors.hpp"

namespace mixcde {

struct NelderMeadOptions {
  int max_evals = 2000;
  double x_tol = 1e-8;   // simplex diameter
  double f_tol = 1e-10;  // spread of function values over the simplex
  double initial_step = 0.5;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int evals = 0;
  bool converged = false;
};

// Downhill simplex minimizer with the standard (Lagarias et al.) coefficients:
// reflection 1, expansion 2, contraction 1/2, shrink 1/2. Non-finite function
// values are treated as +infinity, so the simplex retreats from them.
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& x0,
                                    const NelderMeadOptions& opt = {}) {
  const int d = static_cast<int>(x0.size());
  if (d < 1) throw DimensionError("nelder_mead: empty starting point");

  NelderMeadResult res;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Eigen::VectorXd> pts(d + 1, x0);
  std::vector<double> vals(d + 1);
  for (int i = 1; i <= d; ++i) pts[i][i - 1] += opt.initial_step;
  for (int i = 0; i <= d; ++i) vals[i] = eval(pts[i]);

  std::vector<int> order(d + 1);
  auto sort_simplex = [&] {
    for (int i = 0; i <= d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> p2(d + 1);
    std::vector<double> v2(d + 1);
    for (int i = 0; i <= d; ++i) {
      p2[i] = pts[order[i]];
      v2[i] = vals[order[i]];
    }
    pts.swap(p2);
    vals.swap(v2);
  };

  sort_simplex();
  while (res.evals < opt.max_evals) {
    // Convergence: simplex small in both x and f.
    double xspread = 0.0;
    for (int i = 1; i <= d; ++i) xspread = std::max(xspread, (pts[i] - pts[0]).norm());
    const double fspread = vals[d] - vals[0];
    if (xspread < opt.x_tol && (fspread < opt.f_tol || !std::isfinite(fspread))) {
      res.converged = std::isfinite(vals[0]);
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) centroid += pts[i];
    centroid /= d;

    const Eigen::VectorXd xr = centroid + (centroid - pts[d]);
    const double fr = eval(xr);
    if (fr < vals[0]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[d]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[d] = xe;
        vals[d] = fe;
      } else {
        pts[d] = xr;
        vals[d] = fr;
      }
    } else if (fr < vals[d - 1]) {
      pts[d] = xr;
      vals[d] = fr;
    } else {
      bool shrink = false;
      if (fr < vals[d]) {
        const Eigen::VectorXd xc = centroid + 0.5 * (xr - centroid);
        const double fc = eval(xc);
        if (fc <= fr) {
          pts[d] = xc;
          vals[d] = fc;
        } else {
          shrink = true;
        }
      } else {
        const Eigen::VectorXd xc = centroid - 0.5 * (centroid - pts[d]);
        const double fc = eval(xc);
        if (fc < vals[d]) {
          pts[d] = xc;
          vals[d] = fc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (int i = 1; i <= d; ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          vals[i] = eval(pts[i]);
        }
      }
    }
    sort_simplex();
  }

  sort_simplex();
  res.x = pts[0];
  res.value = vals[0];
  return res;
}

}  // namespace mixcde
