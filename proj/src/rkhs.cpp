#include "svmsel/rkhs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <gsl/gsl_sf_zeta.h>

#include "svmsel/error.hpp"

namespace svmsel {
namespace {

constexpr const char* kModule = "rkhs_core";
constexpr int kMaxClosedFormOrder = 6;

bool is_small_integer(double s) {
  return s >= 1.0 && s <= kMaxClosedFormOrder && std::floor(s) == s;
}

// sum_{k >= q} k^{-p} for p > 1, q >= 1.
double hurwitz(double p, double q) { return gsl_sf_hzeta(p, q); }

}  // namespace

double CircleFourierKernel::coefficient(std::int64_t k) const {
  if (k == 0) return a0;
  return amplitude * std::pow(static_cast<double>(k), -2.0 * smoothness);
}

struct KernelSpec::Impl {
  Family family;
  double sup_bound = 1.0;
  double diagonal_max = 1.0;

  // circle_fourier, closed form: polynomial in z (ascending powers) equal to
  // sum_{k>=1} k^{-2s} cos(2 pi k z) on [0, 1].
  std::vector<double> series_poly;
  // circle_fourier, truncated: number of terms actually summed and the
  // reported truncation remainder.
  std::int64_t terms = 0;
  double remainder = 0.0;
  bool exact_series = false;

  // table: sorted points with their original index.
  std::vector<std::pair<double, std::size_t>> sorted_points;

  double circle_series(double z) const {
    const auto& c = std::get<CircleFourierKernel>(family);
    if (exact_series) {
      double acc = 0.0;
      for (auto it = series_poly.rbegin(); it != series_poly.rend(); ++it) acc = acc * z + *it;
      return c.a0 + c.amplitude * acc;
    }
    // Rotation recurrence for cos(2 pi k z), re-anchored every 64 terms.
    const double theta = 2.0 * std::numbers::pi * z;
    const double step_c = std::cos(theta);
    const double step_s = std::sin(theta);
    double cur_c = step_c;
    double cur_s = step_s;
    double sum = 0.0;
    double comp = 0.0;
    const double p = -2.0 * c.smoothness;
    for (std::int64_t k = 1; k <= terms; ++k) {
      if ((k & 63) == 0) {
        cur_c = std::cos(theta * static_cast<double>(k));
        cur_s = std::sin(theta * static_cast<double>(k));
      }
      const double term = std::pow(static_cast<double>(k), p) * cur_c;
      const double t = sum + term;
      comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
      sum = t;
      const double nc = cur_c * step_c - cur_s * step_s;
      cur_s = cur_s * step_c + cur_c * step_s;
      cur_c = nc;
    }
    return c.a0 + c.amplitude * (sum + comp);
  }

  std::size_t table_index(double x) const {
    auto it = std::lower_bound(sorted_points.begin(), sorted_points.end(), x - 1e-12,
                               [](const auto& a, double v) { return a.first < v; });
    if (it == sorted_points.end() || std::abs(it->first - x) > 1e-12) {
      fail(ErrorCode::domain, kModule, "point " + std::to_string(x) + " is not on the kernel table grid");
    }
    return it->second;
  }
};

KernelSpec::KernelSpec(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

KernelSpec KernelSpec::gaussian(double bandwidth) {
  require(std::isfinite(bandwidth) && bandwidth > 0.0, kModule, "gaussian bandwidth must be positive");
  auto impl = std::make_shared<Impl>();
  impl->family = GaussianKernel{bandwidth};
  impl->sup_bound = 1.0;
  impl->diagonal_max = 1.0;
  return KernelSpec(std::move(impl));
}

KernelSpec KernelSpec::circle_fourier(double a0, double amplitude, double smoothness,
                                      std::int64_t truncation, bool closed_form) {
  require(std::isfinite(a0) && a0 >= 0.0, kModule, "circle_fourier a0 must be nonnegative");
  require(std::isfinite(amplitude) && amplitude >= 0.0, kModule, "circle_fourier amplitude must be nonnegative");
  require(std::isfinite(smoothness) && smoothness > 0.5, kModule, "circle_fourier smoothness must exceed 1/2");
  require(truncation >= 1, kModule, "circle_fourier truncation must be a positive integer");
  require(a0 + amplitude > 0.0, kModule, "circle_fourier kernel is identically zero");

  auto impl = std::make_shared<Impl>();
  CircleFourierKernel params{a0, amplitude, smoothness, truncation, closed_form};
  impl->family = params;

  const double p = 2.0 * smoothness;
  if (closed_form && is_small_integer(smoothness)) {
    // sum_{k>=1} cos(2 pi k x) / k^{2m} = (-1)^{m+1} (2 pi)^{2m} B_{2m}(x) / (2 (2m)!), x in [0, 1].
    const int m = static_cast<int>(smoothness);
    const int order = 2 * m;
    const double scale = ((m % 2 == 1) ? 1.0 : -1.0) * std::pow(2.0 * std::numbers::pi, order) /
                         (2.0 * boost::math::factorial<double>(order));
    impl->series_poly.assign(order + 1, 0.0);
    for (int j = 0; j <= order; ++j) {
      double bj = 0.0;
      if (j == 1) {
        bj = -0.5;
      } else if (j % 2 == 0) {
        bj = boost::math::bernoulli_b2n<double>(j / 2);
      }
      impl->series_poly[order - j] = scale * boost::math::binomial_coefficient<double>(order, j) * bj;
    }
    impl->exact_series = true;
    impl->diagonal_max = a0 + amplitude * gsl_sf_zeta(p);
  } else {
    const double remainder = std::pow(static_cast<double>(truncation), 1.0 - p) / (p - 1.0);
    // Stop early once the remaining terms cannot change the sum in double precision.
    const double negligible = 1e-17 * (a0 + amplitude) / std::max(amplitude, 1e-300);
    const double cutoff = std::pow(negligible * (p - 1.0), 1.0 / (1.0 - p));
    impl->terms = std::min<std::int64_t>(truncation, static_cast<std::int64_t>(std::ceil(std::min(cutoff, 9e15))));
    impl->terms = std::max<std::int64_t>(impl->terms, 1);
    impl->remainder = amplitude * remainder;
    impl->exact_series = false;
    impl->diagonal_max = a0 + amplitude * (gsl_sf_zeta(p) - hurwitz(p, static_cast<double>(truncation) + 1.0));
  }
  impl->sup_bound = std::sqrt(impl->diagonal_max);
  return KernelSpec(std::move(impl));
}

KernelSpec KernelSpec::table(std::vector<double> points, std::vector<double> values) {
  const std::size_t m = points.size();
  require(m > 0, kModule, "table kernel needs at least one point");
  require(values.size() == m * m, kModule, "table kernel needs points.size()^2 values");
  for (double v : points) require(std::isfinite(v), kModule, "table kernel points must be finite");
  Eigen::MatrixXd g(m, m);
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      g(i, j) = values[i * m + j];
      scale = std::max(scale, std::abs(g(i, j)));
    }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < i; ++j)
      require(std::abs(g(i, j) - g(j, i)) <= 1e-12 * std::max(1.0, scale), kModule,
              "table kernel values are not symmetric");
  if (!is_psd(g)) fail(ErrorCode::not_psd, kModule, "table kernel values are not positive semi-definite");

  auto impl = std::make_shared<Impl>();
  impl->sorted_points.reserve(m);
  for (std::size_t i = 0; i < m; ++i) impl->sorted_points.emplace_back(points[i], i);
  std::sort(impl->sorted_points.begin(), impl->sorted_points.end());
  for (std::size_t i = 1; i < m; ++i)
    require(impl->sorted_points[i].first - impl->sorted_points[i - 1].first > 1e-12, kModule,
            "table kernel points must be distinct");
  impl->diagonal_max = g.diagonal().maxCoeff();
  impl->sup_bound = std::sqrt(std::max(impl->diagonal_max, 0.0));
  impl->family = TableKernel{std::move(points), std::move(values)};
  return KernelSpec(std::move(impl));
}

KernelSpec KernelSpec::with_sup_bound(double sup_bound) const {
  require(std::isfinite(sup_bound) && sup_bound > 0.0, kModule, "sup_bound must be positive");
  require(sup_bound * sup_bound >= impl_->diagonal_max * (1.0 - 1e-12), kModule,
          "sup_bound^2 is below the kernel diagonal maximum " + std::to_string(impl_->diagonal_max));
  auto impl = std::make_shared<Impl>(*impl_);
  impl->sup_bound = sup_bound;
  return KernelSpec(std::move(impl));
}

const KernelSpec::Family& KernelSpec::family() const { return impl_->family; }

std::string_view KernelSpec::family_name() const {
  switch (impl_->family.index()) {
    case 0: return "gaussian";
    case 1: return "circle_fourier";
    default: return "table";
  }
}

bool KernelSpec::is_circle() const { return std::holds_alternative<CircleFourierKernel>(impl_->family); }

double KernelSpec::sup_bound() const { return impl_->sup_bound; }

double KernelSpec::diagonal_max() const { return impl_->diagonal_max; }

std::int64_t KernelSpec::effective_truncation() const {
  const auto* c = std::get_if<CircleFourierKernel>(&impl_->family);
  if (c == nullptr || impl_->exact_series) return -1;
  return c->truncation;
}

std::span<const double> KernelSpec::closed_form_poly() const {
  if (!impl_->exact_series) return {};
  return impl_->series_poly;
}

double KernelSpec::operator()(double x, double y) const { return evaluate(x, y).value; }

KernelValue KernelSpec::evaluate(double x, double y) const {
  if (!std::isfinite(x) || !std::isfinite(y)) fail(ErrorCode::domain, kModule, "kernel argument is not finite");
  switch (impl_->family.index()) {
    case 0: {
      const double h = std::get<GaussianKernel>(impl_->family).bandwidth;
      const double d = x - y;
      return {std::exp(-d * d / (2.0 * h * h)), 0.0};
    }
    case 1:
      return {impl_->circle_series(circle_distance(x, y)), impl_->remainder};
    default: {
      const auto& t = std::get<TableKernel>(impl_->family);
      const std::size_t i = impl_->table_index(x);
      const std::size_t j = impl_->table_index(y);
      return {t.values[i * t.points.size() + j], 0.0};
    }
  }
}

double wrap_circle(double x) {
  double w = x - std::floor(x);
  if (w >= 1.0) w = 0.0;
  return w;
}

double circle_distance(double x, double y) {
  double d = wrap_circle(x - y);
  return d > 0.5 ? 1.0 - d : d;
}

Eigen::MatrixXd gram(const KernelSpec& kernel, std::span<const double> xs) {
  require(!xs.empty(), kModule, "gram needs at least one point");
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel(xs[i], xs[j]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool is_psd(const Eigen::MatrixXd& symmetric) {
  const double trace = std::max(symmetric.trace(), 0.0);
  return min_eigenvalue(symmetric) >= -1e-9 * std::max(trace, 1e-300);
}

// With b_i the sorted wrapped anchors and x in [0, 1):
//   f(x) = a0 sum c_i + A sum_i c_i P(x - e_i),  e_i = b_i if b_i <= x else b_i - 1,
// so f(x) only needs sum_i c_i (-e_i)^r over the two halves split at x.
struct RepresenterFn::Moments {
  std::vector<double> points;    // sorted wrapped anchors
  std::vector<double> below;     // (m+1) x (deg+1): sum over the first m of c (-b)^r
  std::vector<double> above;     // (m+1) x (deg+1): sum over the rest of c (1 - b)^r
  std::vector<double> expanded;  // (deg+1) x (deg+1): P_k C(k, j), row j, column k
  std::size_t width = 0;
  double constant = 0.0;         // a0 sum c
  double amplitude = 0.0;

  double eval(double x) const {
    const double w = wrap_circle(x);
    const std::size_t m = static_cast<std::size_t>(std::upper_bound(points.begin(), points.end(), w) - points.begin());
    double t[16];
    for (std::size_t r = 0; r < width; ++r) t[r] = below[m * width + r] + above[m * width + r];
    double acc = 0.0;
    for (std::size_t j = width; j-- > 0;) {
      double coeff = 0.0;
      for (std::size_t k = j; k < width; ++k) coeff += expanded[j * width + k] * t[k - j];
      acc = acc * w + coeff;
    }
    return constant + amplitude * acc;
  }
};

RepresenterFn::RepresenterFn(KernelSpec kernel, std::vector<double> anchors, std::vector<double> coeffs)
    : kernel_(std::move(kernel)), anchors_(std::move(anchors)), coeffs_(std::move(coeffs)) {
  require(anchors_.size() == coeffs_.size(), kModule, "anchors and coefficients differ in length");
  const auto poly = kernel_.closed_form_poly();
  if (poly.empty() || anchors_.size() < 8) return;
  for (double a : anchors_)
    if (!std::isfinite(a)) fail(ErrorCode::domain, kModule, "anchor is not finite");

  const auto& params = std::get<CircleFourierKernel>(kernel_.family());
  auto mom = std::make_shared<Moments>();
  const std::size_t n = anchors_.size();
  const std::size_t width = poly.size();
  mom->width = width;
  mom->amplitude = params.amplitude;
  std::vector<std::pair<double, double>> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = {wrap_circle(anchors_[i]), coeffs_[i]};
  std::sort(sorted.begin(), sorted.end());
  mom->points.resize(n);
  mom->below.assign((n + 1) * width, 0.0);
  mom->above.assign((n + 1) * width, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [b, c] = sorted[i];
    mom->points[i] = b;
    total += c;
    double pw = c;
    for (std::size_t r = 0; r < width; ++r) {
      mom->below[(i + 1) * width + r] = mom->below[i * width + r] + pw;
      pw *= -b;
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    const auto [b, c] = sorted[i];
    double pw = c;
    for (std::size_t r = 0; r < width; ++r) {
      mom->above[i * width + r] = mom->above[(i + 1) * width + r] + pw;
      pw *= 1.0 - b;
    }
  }
  mom->constant = params.a0 * total;
  mom->expanded.assign(width * width, 0.0);
  for (std::size_t j = 0; j < width; ++j)
    for (std::size_t k = j; k < width; ++k)
      mom->expanded[j * width + k] =
          poly[k] * boost::math::binomial_coefficient<double>(static_cast<unsigned>(k), static_cast<unsigned>(j));
  moments_ = std::move(mom);
}

RepresenterFn RepresenterFn::zero(KernelSpec kernel) { return RepresenterFn(std::move(kernel), {}, {}); }

double RepresenterFn::operator()(double x) const {
  if (moments_) {
    if (!std::isfinite(x)) fail(ErrorCode::domain, kModule, "kernel argument is not finite");
    return moments_->eval(x);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    if (coeffs_[i] != 0.0) acc += coeffs_[i] * kernel_(anchors_[i], x);
  }
  return acc;
}

double RepresenterFn::rkhs_norm_squared() const {
  if (anchors_.empty()) return 0.0;
  const Eigen::MatrixXd g = gram(kernel_, anchors_);
  const Eigen::Map<const Eigen::VectorXd> c(coeffs_.data(), static_cast<Eigen::Index>(coeffs_.size()));
  const double q = c.dot(g * c);
  const double scale = c.cwiseAbs().dot(g.cwiseAbs() * c.cwiseAbs());
  if (q < -1e-9 * std::max(1.0, scale)) {
    fail(ErrorCode::not_psd, kModule, "negative squared RKHS norm; kernel is not positive semi-definite");
  }
  return std::max(q, 0.0);
}

double RepresenterFn::rkhs_norm() const { return std::sqrt(rkhs_norm_squared()); }

}  // namespace svmsel
