#pragma once

#include <functional>
#include <span>

namespace svmsel {

/// psi: [0, inf) -> [0, inf), nonnegative, nondecreasing, psi(r)/sqrt(r) nonincreasing.
struct SubrootFn {
  std::function<double(double)> eval;
  /// Starting point for the bracket search.
  double domain_hint = 1.0;

  double operator()(double r) const { return eval(r); }
};

/// Checks both monotonicity conditions on an ascending positive grid.
bool is_subroot(const SubrootFn& psi, std::span<const double> grid, double tol = 1e-12);

struct FixedPoint {
  double value = 0.0;
  /// psi vanished at every probed point; value is 0 and carries no information.
  bool degenerate = false;
  int iterations = 0;
  double residual = 0.0;
};

/// Unique positive solution of psi(r) = r. Uses r >= psi(r) <=> r >= r*:
/// doubling/halving from the hint locates a bracket, bisection closes it.
FixedPoint solve_fixed_point(const SubrootFn& psi, double tol = 1e-10);

/// Pointwise minimum of two sub-root functions (again sub-root).
SubrootFn pointwise_min(SubrootFn a, SubrootFn b);

}  // namespace svmsel
