#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace svmsel {

/// k(x, x') = exp(-(x - x')^2 / (2 bandwidth^2)) on the real line; M = 1.
struct GaussianKernel {
  double bandwidth = 1.0;
};

/// Translation-invariant kernel on the unit circle,
/// k(z) = a0 + sum_{k>=1} A k^{-2s} cos(2 pi k z), points are reals mod 1.
struct CircleFourierKernel {
  double a0 = 1.0;
  double amplitude = 1.0;
  double smoothness = 1.0;
  std::int64_t truncation = 100000;
  /// Use the exact Bernoulli-polynomial form of the infinite series when the
  /// smoothness is a small integer. When false the literal N-term sum is used.
  bool closed_form = true;

  /// Fourier coefficient a_k (a_0 for k = 0).
  double coefficient(std::int64_t k) const;
};

/// Explicit symmetric kernel values on a finite set of points.
struct TableKernel {
  std::vector<double> points;
  std::vector<double> values;  // row-major, points.size()^2 entries
};

struct KernelValue {
  double value = 0.0;
  /// Bound on |value - exact kernel value| caused by series truncation.
  double uncertainty = 0.0;
};

class KernelSpec {
 public:
  using Family = std::variant<GaussianKernel, CircleFourierKernel, TableKernel>;

  static constexpr std::int64_t kDefaultTruncation = 100000;

  static KernelSpec gaussian(double bandwidth);
  static KernelSpec circle_fourier(double a0, double amplitude, double smoothness,
                                   std::int64_t truncation = kDefaultTruncation,
                                   bool closed_form = true);
  static KernelSpec table(std::vector<double> points, std::vector<double> values);

  /// Returns a copy with an explicit sup bound M; M^2 must dominate k(x, x).
  KernelSpec with_sup_bound(double sup_bound) const;

  const Family& family() const;
  std::string_view family_name() const;
  bool is_circle() const;

  /// M with k(x, x) <= M^2 for every x in the input space.
  double sup_bound() const;

  double operator()(double x, double y) const;
  KernelValue evaluate(double x, double y) const;

  /// Number of Fourier frequencies carried by a circle kernel; negative when
  /// the infinite series is evaluated exactly.
  std::int64_t effective_truncation() const;

  /// Largest k(x, x) over the input space (k(0) for the circle family).
  double diagonal_max() const;

  /// Ascending coefficients of P with k(x, y) = a0 + A P(frac(x - y)) when the circle
  /// series is evaluated in closed form; empty otherwise.
  std::span<const double> closed_form_poly() const;

 private:
  struct Impl;
  explicit KernelSpec(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

/// Reduces a circle coordinate to [0, 1).
double wrap_circle(double x);

/// Circle distance |x - x'| folded to [0, 1/2].
double circle_distance(double x, double y);

Eigen::MatrixXd gram(const KernelSpec& kernel, std::span<const double> xs);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& symmetric);

/// True when the smallest eigenvalue is >= -1e-9 * trace.
bool is_psd(const Eigen::MatrixXd& symmetric);

/// Finite kernel expansion f = sum_i c_i k(x_i, .).
class RepresenterFn {
 public:
  RepresenterFn(KernelSpec kernel, std::vector<double> anchors, std::vector<double> coeffs);

  static RepresenterFn zero(KernelSpec kernel);

  double operator()(double x) const;

  /// sqrt(c^T K c); a radicand below -1e-9 * scale means the kernel is broken.
  double rkhs_norm() const;
  double rkhs_norm_squared() const;

  const KernelSpec& kernel() const { return kernel_; }
  std::span<const double> anchors() const { return anchors_; }
  std::span<const double> coeffs() const { return coeffs_; }
  std::size_t size() const { return anchors_.size(); }

 private:
  struct Moments;

  KernelSpec kernel_;
  std::vector<double> anchors_;
  std::vector<double> coeffs_;
  // prefix moments over sorted anchors for closed-form circle kernels
  std::shared_ptr<const Moments> moments_;
};

}  // namespace svmsel
