#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "svmsel/hinge_path.hpp"
#include "svmsel/rkhs.hpp"
#include "svmsel/synthgen.hpp"

namespace svmsel {

/// Regularizer phi with phi(0) = 0, nondecreasing and phi(x) >= x for x >= 1/2.
class Phi {
 public:
  enum class Kind { linear, quadratic, custom };

  static Phi linear();
  static Phi quadratic();
  static Phi custom(std::string name, std::function<double(double)> fn);
  /// "linear" or "quadratic".
  static Phi from_name(const std::string& name);

  double operator()(double x) const { return fn_(x); }
  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  /// Checks phi(0) = 0, monotonicity and phi(x) >= x on a grid; throws on failure.
  void validate() const;

 private:
  Phi(Kind kind, std::string name, std::function<double(double)> fn)
      : kind_(kind), name_(std::move(name)), fn_(std::move(fn)) {}
  Kind kind_;
  std::string name_;
  std::function<double(double)> fn_;
};

struct TrainConfig {
  Phi phi = Phi::linear();
  double Lambda = 1.0;
  double tol = 1e-6;
  /// Event budget of the path solver; 0 picks 50 n + 100.
  std::size_t max_iters = 0;
  std::size_t grid_points = 64;
  /// Smallest positive grid radius as a fraction of the largest (M^-1 n).
  double grid_floor = 1e-7;
};

struct ConstrainedFit {
  RepresenterFn f;
  double emp_hinge = 1.0;
  double norm = 0.0;
  std::size_t iterations = 0;
  /// The path could not be traced far enough and dual coordinate ascent was used.
  bool fallback = false;
  /// The fallback hit its iteration budget; f is the best iterate.
  bool budget_exhausted = false;
};

/// Constrained solutions for many radii from one traced path.
class ConstrainedSolver {
 public:
  ConstrainedSolver(const Sample& sample, const KernelSpec& kernel, std::size_t max_events = 0);

  ConstrainedFit solve(double R) const;
  /// Empirical hinge of the constrained minimizer (no representer allocated).
  double inner(double R) const;

  const HingePath& path() const { return path_; }
  const Sample& sample() const { return sample_; }
  const KernelSpec& kernel() const { return kernel_; }

 private:
  HingePath::Point fallback_point(double R, bool& exhausted) const;

  Sample sample_;
  KernelSpec kernel_;
  HingePath path_;
};

/// min (1/n) sum (1 - y_i f(x_i))_+ over |f|_k <= R.
ConstrainedFit train_constrained(const Sample& sample, const KernelSpec& kernel, double R, const TrainConfig& cfg = {});

struct FitResult {
  RepresenterFn g_hat;
  double objective = 1.0;
  double emp_hinge = 1.0;
  double R_opt = 0.0;
  double R_hat_continuous = 0.0;
  std::vector<std::pair<double, double>> inner_values;  // (R, inner(R)) on the grid
  std::size_t path_events = 0;
  std::size_t evaluations = 0;
  bool grid_fallback = false;
  bool solver_fallback = false;
};

/// argmin_g (1/n) sum hinge + Lambda phi(M |g|_k) via a radius search over inner(R) + Lambda phi(M R).
FitResult train_regularized(const Sample& sample, const KernelSpec& kernel, const TrainConfig& cfg);
FitResult train_regularized(const ConstrainedSolver& solver, const TrainConfig& cfg);

struct DualResult {
  double objective = 0.0;  // primal value (1/n) sum hinge + 2 Lambda M^2 |f|^2
  double dual = 0.0;
  double gap = 0.0;
  std::size_t epochs = 0;
  Eigen::VectorXd coeffs;
};

/// Coordinate ascent on the box-constrained dual of the quadratic-phi problem.
DualResult dual_svm0_crosscheck(const Sample& sample, const KernelSpec& kernel, double Lambda, double gap_tol = 1e-8);

/// Dual coordinate ascent for max sum theta - theta^T Q theta / (2u), theta in [0,1]^n.
/// Returns the final duality gap on the summed scale; theta is updated in place.
double dual_coordinate_ascent(const Eigen::MatrixXd& Q, double u, Eigen::VectorXd& theta, double gap_tol,
                              std::size_t max_epochs, std::size_t* epochs = nullptr);

}  // namespace svmsel
