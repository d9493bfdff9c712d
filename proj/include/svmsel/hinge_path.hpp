#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace svmsel {

/// Piecewise-linear solution path of the bias-free hinge SVM
///   min_f sum_i (1 - y_i f(x_i))_+ + (u / 2) |f|_k^2,   u = n * lambda,
/// traced from u = infinity down to the point where every margin is >= 1.
/// With Q_ij = y_i y_j K_ij the dual variables theta in [0, 1]^n are affine in u
/// between events and f = sum_i (theta_i y_i / u) k(x_i, .).
/// Because |f_u| is nondecreasing as u falls, f_u also solves the constrained
/// problem over the ball of radius |f_u|.
class HingePath {
 public:
  struct Point {
    double u = 0.0;
    double norm = 0.0;
    double emp_hinge = 1.0;
    Eigen::VectorXd coeffs;  // alpha_i = theta_i y_i / u
  };

  HingePath(const Eigen::MatrixXd& gram, std::span<const int> labels, std::size_t max_events = 0);

  /// Constrained minimizer over {|f| <= R}.
  Point at_radius(double R) const;

  /// Regularized minimizer for the given u (> 0).
  Point at_u(double u) const;

  /// Path traced to its end; otherwise queries past reachable_norm() are not covered.
  bool complete() const { return complete_; }
  bool singular() const { return singular_; }
  /// Diagonal shift used while tracing (0 unless the exact elbow system was singular).
  /// Returned points are always evaluated with the exact Q.
  double ridge() const { return ridge_; }
  /// The ridged trace stopped before its end; larger radii gain little over the last knot.
  bool ridge_limited() const { return ridge_limited_; }
  std::size_t events() const { return events_; }

  /// Largest norm covered by the traced part (infinity when the path never terminates).
  double reachable_norm() const;

  std::size_t size() const { return static_cast<std::size_t>(y_.size()); }
  const Eigen::MatrixXd& q_matrix() const { return Q_; }

 private:
  struct Knot {
    double u = 0.0;
    double quad = 0.0;  // theta^T Q theta
    double norm = 0.0;
    Eigen::VectorXd theta;
    // segment to the next knot, Delta = theta_next - theta
    double cross = 0.0;  // Delta^T Q theta
    double curv = 0.0;   // Delta^T Q Delta
  };

  void trace(std::size_t max_events);
  Point point_from_theta(const Eigen::VectorXd& theta, double u) const;
  Point on_segment(std::size_t k, double t) const;
  double segment_norm(std::size_t k, double t) const;

  Eigen::MatrixXd Q_;
  Eigen::VectorXd y_;
  double quad_all_ = 0.0;  // 1^T Q 1
  double ridge_ = 0.0;
  bool ridge_limited_ = false;
  std::vector<Knot> knots_;
  bool complete_ = false;
  bool singular_ = false;
  bool unbounded_ = false;
  std::size_t events_ = 0;
};

}  // namespace svmsel
