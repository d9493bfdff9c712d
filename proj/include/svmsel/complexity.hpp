#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "svmsel/rkhs.hpp"
#include "svmsel/spectrum.hpp"
#include "svmsel/subroot.hpp"

namespace svmsel {

enum class Setting { s1, s2 };

const char* setting_name(Setting s);

/// gamma(n) = eta1^-1 n^-1/2 inf_d (d / sqrt(n) + (eta1 / M) sqrt(tail(d))).
/// The scan stops once d / sqrt(n) alone reaches the running minimum.
struct GammaS1 {
  double value = 0.0;
  std::size_t argmin = 0;
};
GammaS1 gamma_s1_detail(const SpectrumModel& spec, double n, double eta1, double M);
double gamma_s1(const SpectrumModel& spec, double n, double eta1, double M);

/// Sup-norm entropy H(eps) of the unit ball.
class EntropyModel {
 public:
  /// H(eps) = C_H eps^(-1/s).
  static EntropyModel power_law(double smoothness, double constant = 1.0);

  /// H = values[i] on (eps[i-1], eps[i]] (eps[-1] = 0), and 0 past eps.back().
  static EntropyModel table(std::vector<double> eps, std::vector<double> values);

  bool is_power_law() const { return table_eps_.empty(); }
  double smoothness() const { return smoothness_; }
  double constant() const { return constant_; }
  std::span<const double> table_eps() const { return table_eps_; }
  std::span<const double> table_values() const { return table_values_; }

  double entropy(double eps) const;

 private:
  double smoothness_ = 1.0;
  double constant_ = 1.0;
  std::vector<double> table_eps_;
  std::vector<double> table_values_;
};

/// xi(x) = integral_0^x sqrt(H(eps)) d eps.
double xi(const EntropyModel& em, double x);

/// Solution of xi(x) = sqrt(n) x^2 / M.
double x_star(const EntropyModel& em, double n, double M);

/// M^-2 x*(n)^2.
double gamma_s2(const EntropyModel& em, double n, double M);

/// phi_R(r) = (4 / sqrt(n)) inf_{d <= d_max} (sqrt(d r) + 2 R sqrt(tail(d))).
/// d_max is the rank for finite spectra and the explicit prefix length otherwise.
SubrootFn phi_r_s1(const SpectrumModel& spec, double R, double n);

struct ModelParams {
  double R = 0.0;
  double b_R = 0.0;
  double C_R = 0.0;
  double r_star = 0.0;
  Setting setting = Setting::s1;
};

/// b_R and C_R for the ball of radius R; r_star is left at 0.
ModelParams model_params(Setting setting, double R, double M, double eta0, double eta1);

/// 16 C_R^2 n^-1/2 inf_d (d / sqrt(n) + (eta1 / M) sqrt(tail(d))) = 16 C_R^2 eta1 gamma_s1.
double r_star_bound_s1(double C_R, const SpectrumModel& spec, double n, double eta1, double M);

/// 2500 M^-2 C_R^2 x*(n)^2.
double r_star_bound_s2(double C_R, const EntropyModel& em, double n, double M);

/// Fixed point of r = C_R phi_R(r) (zero for a zero spectrum).
double r_star_exact_s1(double C_R, const SpectrumModel& spec, double R, double n);

/// (1/sqrt(n)) inf_d (sqrt(d r) + R sqrt(tail(d))), d over the whole explicit spectrum.
double localized_bound_inf(const SpectrumModel& spec, double R, double r, double n);

/// sqrt(2/n) sqrt(sum_j min(r, R^2 lambda_j)).
double localized_bound_sum(const SpectrumModel& spec, double R, double r, double n);

// ---- Rademacher oracle on the circle ----

/// Fourier features of a circle kernel with E[psi_j(X)^2] = lambda_j under the
/// uniform marginal; columns follow the nonincreasing spectrum order.
struct CircleFeatures {
  Eigen::MatrixXd psi;          // n x D
  std::vector<double> lambda;   // D
};

CircleFeatures circle_features(const KernelSpec& kernel, std::span<const double> xs, std::size_t dims);

/// max c.alpha subject to |alpha|^2 <= R^2 and sum lambda_j alpha_j^2 <= r.
struct EllipsoidSup {
  double value = 0.0;  // dual value (upper bound, equal to the max up to rounding)
  double lower = 0.0;  // value of the feasible certificate alpha
  Eigen::VectorXd alpha;
};

EllipsoidSup sup_two_ellipsoids(const Eigen::VectorXd& c, std::span<const double> lambda, double R, double r);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;
};

/// E_sigma sup_alpha n^-1 sum_i sigma_i g_alpha(X_i) estimated from n_sigma sign vectors.
/// With distinct=true the sign vectors are drawn without replacement.
MonteCarloEstimate rademacher_mc(const CircleFeatures& features, double R, double r, std::size_t n_sigma,
                                 std::uint64_t seed, bool distinct = false);

/// Exact E_sigma by enumerating all 2^n sign vectors (n <= 20).
double rademacher_exact(const CircleFeatures& features, double R, double r);

}  // namespace svmsel
