#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "svmsel/rkhs.hpp"

namespace svmsel {

/// Nonincreasing eigenvalue sequence of the kernel integral operator.
/// An explicit prefix is stored; tail sums past the prefix come from a
/// closed-form rule (zero for finite-rank spectra).
class SpectrumModel {
 public:
  static constexpr std::size_t kDefaultPrefix = 10000;

  /// Finite-rank spectrum from explicit values (sorted, negatives clamped to 0).
  static SpectrumModel from_eigenvalues(std::vector<double> values);

  /// Spectrum with explicit prefix and a rule giving sum_{j > d} lambda_j for
  /// d >= prefix.size(). The rule must be nonincreasing in d.
  static SpectrumModel with_tail_rule(std::vector<double> prefix, std::function<double(std::size_t)> tail_rule);

  std::span<const double> prefix() const { return prefix_; }
  std::size_t prefix_size() const { return prefix_.size(); }

  /// lambda_j for 1-based j; past the prefix the value is reconstructed from the tail rule.
  double eigenvalue(std::size_t j) const;

  /// sum_{j > d} lambda_j.
  double tail_sum(std::size_t d) const;

  double total() const { return tail_sum(0); }

  /// True when every eigenvalue past the prefix is zero.
  bool finite_rank() const { return !tail_rule_; }

  /// Number of strictly positive eigenvalues, or SIZE_MAX for infinite rank.
  std::size_t rank() const;

  bool empty() const { return prefix_.empty() && !tail_rule_; }

 private:
  std::vector<double> prefix_;
  std::vector<double> suffix_;  // suffix_[d] = sum_{d < j <= prefix} lambda_j
  std::function<double(std::size_t)> tail_rule_;
  double tail_after_prefix_ = 0.0;
};

/// Analytic spectrum of a circle_fourier kernel under the uniform marginal:
/// {a0} together with a_k / 2 twice for each k >= 1, sorted nonincreasing.
SpectrumModel analytic_spectrum(const KernelSpec& kernel, std::size_t prefix = SpectrumModel::kDefaultPrefix);

/// Eigenvalues of gram / n with negatives clamped and zero tail past n.
SpectrumModel empirical_spectrum(const Eigen::MatrixXd& gram, std::size_t n);

/// Writes "index,eigenvalue" rows for the explicit prefix (1-based index).
void write_spectrum_csv(std::ostream& out, const SpectrumModel& spectrum, std::size_t max_rows = 0);

}  // namespace svmsel
