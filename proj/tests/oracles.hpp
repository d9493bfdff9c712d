// Independent reference computations used by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// min (1/n) sum (1 - y_i (Phi w)_i)_+ over |w| <= R with Phi = K^{1/2}, by the central-cut
// ellipsoid method. Returns the best feasible objective seen.
inline double constrained_hinge(const Eigen::MatrixXd& K, const std::vector<int>& y, double R,
                                int iterations = 4000) {
  const Eigen::Index n = K.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd Phi = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  auto objective = [&](const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
    const Eigen::VectorXd f = Phi * w;
    double total = 0.0;
    if (grad) grad->setZero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = y[static_cast<std::size_t>(i)] * f[i];
      if (m < 1.0) {
        total += 1.0 - m;
        if (grad) *grad -= y[static_cast<std::size_t>(i)] * Phi.row(i).transpose();
      }
    }
    if (grad) *grad /= static_cast<double>(n);
    return total / static_cast<double>(n);
  };
  double best = 1.0;  // w = 0
  if (R <= 0.0) return best;
  const double dim = static_cast<double>(n);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) * (R * R * 1.0001);
  Eigen::VectorXd g(n);
  for (int it = 0; it < iterations; ++it) {
    const double norm = c.norm();
    if (norm > R) {
      g = c / norm;  // feasibility cut
    } else {
      best = std::min(best, objective(c, &g));
      if (g.norm() == 0.0) return best;
    }
    const Eigen::VectorXd Pg = P * g;
    const double gPg = g.dot(Pg);
    if (!(gPg > 1e-300)) break;
    const Eigen::VectorXd step = Pg / std::sqrt(gPg);
    if (n == 1) {
      // 1-d: halve the interval
      c -= 0.5 * step;
      P *= 0.25;
      continue;
    }
    c -= step / (dim + 1.0);
    P = dim * dim / (dim * dim - 1.0) * (P - 2.0 / (dim + 1.0) * step * step.transpose());
    P = 0.5 * (P + P.transpose());
  }
  return best;
}

// sum_{j > d} of an explicit finite sequence.
inline double tail(const std::vector<double>& lambda, std::size_t d) {
  double s = 0.0;
  for (std::size_t j = d; j < lambda.size(); ++j) s += lambda[j];
  return s;
}

// eta(1 - g)_+ + (1 - eta)(1 + g)_+ minimized over a grid of g in [-2, 2].
inline double argmin_cond_hinge(double eta, int points = 4001) {
  double best = std::numeric_limits<double>::infinity(), arg = 0.0;
  for (int i = 0; i < points; ++i) {
    const double g = -2.0 + 4.0 * i / (points - 1);
    const double v = eta * std::max(0.0, 1.0 - g) + (1.0 - eta) * std::max(0.0, 1.0 + g);
    if (v < best - 1e-15) {
      best = v;
      arg = g;
    }
  }
  return arg;
}

}  // namespace oracle
