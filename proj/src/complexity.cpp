#include "svmsel/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svmsel/error.hpp"

namespace svmsel {
namespace {

constexpr const char* kModule = "complexity";

void check_entropy_smoothness(double s) {
  if (!(s > 0.5) || !std::isfinite(s)) {
    fail(ErrorCode::domain, kModule, "power-law entropy needs s > 1/2 (integral diverges), got " + std::to_string(s));
  }
}

}  // namespace

const char* setting_name(Setting s) { return s == Setting::s1 ? "s1" : "s2"; }

GammaS1 gamma_s1_detail(const SpectrumModel& spec, double n, double eta1, double M) {
  if (spec.empty()) fail(ErrorCode::invalid_argument, kModule, "empty spectrum");
  require(n >= 1.0, kModule, "sample size must be >= 1");
  require(eta1 > 0.0 && eta1 <= 0.5, kModule, "eta1 must lie in (0, 1/2]");
  require(M > 0.0, kModule, "sup bound M must be positive");

  const double sqrt_n = std::sqrt(n);
  const double weight = eta1 / M;
  GammaS1 out;
  double best = weight * std::sqrt(spec.tail_sum(0));
  for (std::size_t d = 1;; ++d) {
    const double d_term = static_cast<double>(d) / sqrt_n;
    if (d_term >= best) break;
    const double tail = spec.tail_sum(d);
    const double v = d_term + weight * std::sqrt(tail);
    if (v < best) {
      best = v;
      out.argmin = d;
    }
    if (tail <= 0.0) break;
  }
  out.value = best / (eta1 * sqrt_n);
  return out;
}

double gamma_s1(const SpectrumModel& spec, double n, double eta1, double M) {
  return gamma_s1_detail(spec, n, eta1, M).value;
}

EntropyModel EntropyModel::power_law(double smoothness, double constant) {
  check_entropy_smoothness(smoothness);
  require(constant > 0.0 && std::isfinite(constant), kModule, "entropy constant must be positive");
  EntropyModel em;
  em.smoothness_ = smoothness;
  em.constant_ = constant;
  return em;
}

EntropyModel EntropyModel::table(std::vector<double> eps, std::vector<double> values) {
  require(!eps.empty() && eps.size() == values.size(), kModule, "entropy table needs matching nonempty columns");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    require(std::isfinite(eps[i]) && eps[i] > 0.0, kModule, "entropy table eps must be positive");
    require(std::isfinite(values[i]) && values[i] >= 0.0, kModule, "entropy values must be nonnegative");
    if (i > 0) {
      require(eps[i] > eps[i - 1], kModule, "entropy table eps must increase");
      require(values[i] <= values[i - 1], kModule, "entropy values must be nonincreasing in eps");
    }
  }
  EntropyModel em;
  em.table_eps_ = std::move(eps);
  em.table_values_ = std::move(values);
  return em;
}

double EntropyModel::entropy(double eps) const {
  require(eps > 0.0, kModule, "entropy argument must be positive");
  if (is_power_law()) return constant_ * std::pow(eps, -1.0 / smoothness_);
  auto it = std::lower_bound(table_eps_.begin(), table_eps_.end(), eps);
  if (it == table_eps_.end()) return 0.0;
  return table_values_[static_cast<std::size_t>(it - table_eps_.begin())];
}

double xi(const EntropyModel& em, double x) {
  require(x >= 0.0 && std::isfinite(x), kModule, "xi argument must be nonnegative");
  if (x == 0.0) return 0.0;
  if (em.is_power_law()) {
    const double a = 1.0 - 1.0 / (2.0 * em.smoothness());
    return std::sqrt(em.constant()) * std::pow(x, a) / a;
  }
  // step function: exact sum over the pieces
  const auto eps = em.table_eps();
  const auto h = em.table_values();
  double total = 0.0;
  double left = 0.0;
  for (std::size_t i = 0; i < eps.size() && left < x; ++i) {
    const double right = std::min(x, eps[i]);
    total += std::sqrt(h[i]) * (right - left);
    left = eps[i];
  }
  return total;
}

double x_star(const EntropyModel& em, double n, double M) {
  require(n >= 1.0, kModule, "sample size must be >= 1");
  require(M > 0.0, kModule, "sup bound M must be positive");
  const double target = std::sqrt(n) / M;
  if (em.is_power_law()) {
    const double inv = 1.0 / (2.0 * em.smoothness());
    const double a = 1.0 - inv;
    return std::pow(M * std::sqrt(em.constant()) / (a * std::sqrt(n)), 1.0 / (1.0 + inv));
  }
  if (em.table_values()[0] == 0.0) return 0.0;
  // xi(x) / x^2 is strictly decreasing from +inf
  auto above = [&](double x) { return xi(em, x) / (x * x) > target; };
  double lo = 1.0, hi = 1.0;
  while (!above(lo)) lo *= 0.5;
  while (above(hi)) hi *= 2.0;
  for (int it = 0; it < 2000; ++it) {
    const double mid = hi > 4.0 * lo ? std::sqrt(lo * hi) : lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    (above(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double gamma_s2(const EntropyModel& em, double n, double M) {
  const double x = x_star(em, n, M);
  return x * x / (M * M);
}

SubrootFn phi_r_s1(const SpectrumModel& spec, double R, double n) {
  require(R >= 0.0 && std::isfinite(R), kModule, "radius must be nonnegative");
  require(n >= 1.0, kModule, "sample size must be >= 1");
  const std::size_t d_max = spec.prefix_size();
  std::vector<double> root_tail(d_max + 1);
  for (std::size_t d = 0; d <= d_max; ++d) root_tail[d] = std::sqrt(spec.tail_sum(d));
  const double scale = 4.0 / std::sqrt(n);
  auto eval = [root_tail = std::move(root_tail), R, scale](double r) {
    r = std::max(r, 0.0);
    double best = 2.0 * R * root_tail[0];
    for (std::size_t d = 1; d < root_tail.size(); ++d) {
      const double d_term = std::sqrt(static_cast<double>(d) * r);
      if (d_term >= best) break;
      best = std::min(best, d_term + 2.0 * R * root_tail[d]);
    }
    return scale * best;
  };
  return SubrootFn{std::move(eval), 1.0};
}

ModelParams model_params(Setting setting, double R, double M, double eta0, double eta1) {
  require(R >= 0.0 && std::isfinite(R), kModule, "radius must be nonnegative");
  require(M > 0.0, kModule, "sup bound M must be positive");
  require(eta0 > 0.0 && eta0 <= 0.5, kModule, "eta0 must lie in (0, 1/2]");
  ModelParams p;
  p.R = R;
  p.setting = setting;
  p.b_R = 1.0 + M * R;
  if (setting == Setting::s1) {
    require(eta1 > 0.0 && eta1 <= 0.5, kModule, "eta1 must lie in (0, 1/2]");
    p.C_R = 2.0 * (M * R / eta1 + 1.0 / eta0);
  } else {
    p.C_R = M * R + 1.0 / eta0;
  }
  return p;
}

double r_star_bound_s1(double C_R, const SpectrumModel& spec, double n, double eta1, double M) {
  return 16.0 * C_R * C_R * eta1 * gamma_s1(spec, n, eta1, M);
}

double r_star_bound_s2(double C_R, const EntropyModel& em, double n, double M) {
  const double x = x_star(em, n, M);
  return 2500.0 * C_R * C_R * x * x / (M * M);
}

double r_star_exact_s1(double C_R, const SpectrumModel& spec, double R, double n) {
  require(C_R > 0.0, kModule, "C_R must be positive");
  SubrootFn phi = phi_r_s1(spec, R, n);
  SubrootFn psi{[phi, C_R](double r) { return C_R * phi(r); }, 1.0};
  const FixedPoint fp = solve_fixed_point(psi);
  return fp.degenerate ? 0.0 : fp.value;
}

double localized_bound_inf(const SpectrumModel& spec, double R, double r, double n) {
  require(n >= 1.0 && R >= 0.0 && r >= 0.0, kModule, "localized bound needs n >= 1, R >= 0, r >= 0");
  double best = R * std::sqrt(spec.tail_sum(0));
  for (std::size_t d = 1; d <= spec.prefix_size(); ++d) {
    const double d_term = std::sqrt(static_cast<double>(d) * r);
    if (d_term >= best) break;
    best = std::min(best, d_term + R * std::sqrt(spec.tail_sum(d)));
  }
  return best / std::sqrt(n);
}

double localized_bound_sum(const SpectrumModel& spec, double R, double r, double n) {
  require(n >= 1.0 && R >= 0.0 && r >= 0.0, kModule, "localized bound needs n >= 1, R >= 0, r >= 0");
  require(spec.finite_rank(), kModule, "sum bound needs an explicit finite spectrum");
  double total = 0.0;
  for (double lambda : spec.prefix()) total += std::min(r, R * R * lambda);
  return std::sqrt(2.0 / n) * std::sqrt(total);
}

}  // namespace svmsel
