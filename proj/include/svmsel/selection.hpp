#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "svmsel/complexity.hpp"
#include "svmsel/losses.hpp"
#include "svmsel/solver.hpp"
#include "svmsel/spectrum.hpp"
#include "svmsel/synthgen.hpp"

namespace svmsel {

struct CalibrationInputs {
  Setting setting = Setting::s1;
  const SpectrumModel* spectrum = nullptr;  // required for s1
  const EntropyModel* entropy = nullptr;    // required for s2
  double n = 0.0;
  double delta = 0.05;
  double eta0 = 0.2;
  double eta1 = 0.3;
  double M = 1.0;
  double c = 1.0;
  double K = 3.0;
  Phi phi = Phi::linear();
  /// Use w1 eta0^-1 instead of w1^-1 eta0^-1 as the additive penalty term.
  bool w1_not_inverted = false;
};

struct PenaltyRow {
  double R = 0.0;
  double pen = 0.0;
  double rho = 0.0;
  ModelParams params;  // r_star holds the setting's upper bound
  /// 250 K r*/C + B (x + log(1/delta) + log 2) / (3n), B = 75 K C + 28 b.
  double sufficient = 0.0;
};

struct PenaltyCalibration {
  Setting setting = Setting::s1;
  double delta = 0.05;
  double c = 1.0;
  double K = 3.0;
  double eta0 = 0.2;
  double eta1 = 0.3;
  double w1 = 0.3;
  double M = 1.0;
  std::size_t n = 0;
  double gamma = 0.0;
  double Lambda = 0.0;
  double x_R = 0.0;
  Phi phi = Phi::linear();
  bool w1_not_inverted = false;
  std::vector<PenaltyRow> rows;

  /// w1^-1 eta0^-1 (or w1 eta0^-1 when flagged).
  double additive() const;
  /// Lambda (phi(M R / 2) + additive).
  double pen(double R) const;
  /// Lambda (phi(M R) + phi(1) + additive) - pen(R).
  double rho(double R) const;
  std::vector<double> radii() const;
};

/// Lambda_n = c (gamma(n) + w1^-1 (log(log(n) / delta) v 1) / n) and the penalty table over
/// R = M^-1 2^k, 0 <= k <= ceil(log2 n), with x_R = log(log2 n + 2).
PenaltyCalibration calibrate(const CalibrationInputs& in);

struct SelectionRow {
  std::size_t kernel = 0;
  double R = 0.0;
  double emp_hinge = 1.0;
  double norm = 0.0;
  double pen = 0.0;
  double penalized = 0.0;
  double rho = 0.0;
  bool chosen = false;
};

struct SelectionResult {
  std::size_t kernel_index = 0;
  double R_hat = 0.0;
  RepresenterFn g_hat;
  std::vector<SelectionRow> rows;
};

/// Argmin over (kernel, R) of P_n l(f_R) + pen(kernel, R); ties go to the smaller R, then
/// the lower kernel index. Each calibration must already use delta / t.
SelectionResult select_model(const Sample& sample, const std::vector<KernelSpec>& kernels,
                             const std::vector<PenaltyCalibration>& calibrations, const TrainConfig& cfg = {});

/// Approximate-minimizer check: with R_hat = M^-1 2^ceil((log2 M|g|)_+),
/// P_n l(g) + pen(R_hat) <= min_R (P_n l(f_R) + pen(R) + rho_R) + tol.
struct Certificate {
  double lhs = 0.0;
  double rhs = 0.0;
  double R_hat = 0.0;
  bool passed = false;
};

Certificate approx_minimizer_certificate(const FitResult& fit, const ConstrainedSolver& solver,
                                         const PenaltyCalibration& cal, double tol = 1e-6);

/// Reference functions f_R trained on a large sample, with their exact relative hinge risks.
struct OracleReference {
  std::vector<double> radii;
  std::vector<double> norms;
  std::vector<double> risks;
  std::size_t n_ref = 0;
};

/// Trains f_R for R = 0 and every R in `radii` on one n_ref sample.
OracleReference build_oracle_reference(const SyntheticDist& dist, const KernelSpec& kernel,
                                       const std::vector<double>& radii, std::size_t n_ref, std::uint64_t seed);

/// 2 min_R [L(f_R) + 2 Lambda phi(2 M |f_R|)] + 4 Lambda (2 phi(2) + trailing), where trailing is
/// w1^-1 eta0^-1, or c w1 eta0^-1 with the flag set.
double oracle_rhs(const OracleReference& ref, const PenaltyCalibration& cal, const Phi& phi,
                  bool trailing_c_w1 = false);

}  // namespace svmsel
