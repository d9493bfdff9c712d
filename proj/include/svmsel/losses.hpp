#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "svmsel/rkhs.hpp"
#include "svmsel/synthgen.hpp"

namespace svmsel {

/// (1 - margin)_+
inline double hinge(double margin) { return margin < 1.0 ? 1.0 - margin : 0.0; }

/// 1{margin <= 0}; a zero margin is an error.
inline int zero_one(double margin) { return margin <= 0.0 ? 1 : 0; }

/// eta (1 - g)_+ + (1 - eta) (1 + g)_+
double cond_hinge_risk(double eta, double g);

using ScalarFn = std::function<double(double)>;

struct RiskReport {
  enum class Method { quadrature, monte_carlo };

  double rel_hinge = 0.0;  // L(g, s*)
  double rel_01 = 0.0;     // Theta(g, s*)
  Method method = Method::quadrature;
  /// Quadrature: last refinement change. Monte Carlo: larger of the two standard errors.
  double error_estimate = 0.0;
  double hinge_std_error = 0.0;
  double zero_one_std_error = 0.0;
};

struct QuadratureOptions {
  double tol = 1e-8;
  /// Extra panel boundaries where g is known to be non-smooth (kernel anchors).
  std::vector<double> kinks;
  int max_levels = 14;
};

/// Relative hinge and 0-1 risks by composite 64-point Gauss-Legendre quadrature
/// over panels split at eta's breakpoints, the kinks, and the roots of g, g - 1, g + 1.
RiskReport relative_risks(const ScalarFn& g, const SyntheticDist& dist, const QuadratureOptions& opts = {});

/// Same, with the anchors of f added as kinks.
RiskReport relative_risks(const RepresenterFn& f, const SyntheticDist& dist, double tol = 1e-8);

double rel_hinge_risk(const ScalarFn& g, const SyntheticDist& dist);
double rel_01_risk(const ScalarFn& g, const SyntheticDist& dist);

/// Monte Carlo over (X, Y) draws: mean of l(Y g(X)) - l(Y s*(X)) and the 0-1 analogue.
RiskReport relative_risks_mc(const ScalarFn& g, const SyntheticDist& dist, std::size_t draws, std::uint64_t seed);

/// (1/n) sum (1 - y_i g_i)_+ from precomputed function values.
double empirical_hinge(std::span<const double> values, std::span<const int> labels);
double empirical_hinge(const ScalarFn& g, const Sample& sample);

}  // namespace svmsel
