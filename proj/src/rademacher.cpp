#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_set>

#include <boost/math/tools/minima.hpp>

#include "svmsel/complexity.hpp"
#include "svmsel/error.hpp"
#include "svmsel/rng.hpp"

namespace svmsel {
namespace {

constexpr const char* kModule = "complexity";
constexpr std::size_t kMaxFeatures = 64;

struct FeatureSlot {
  double lambda;
  std::int64_t frequency;  // 0 for the constant
  bool sine;
};

}  // namespace

CircleFeatures circle_features(const KernelSpec& kernel, std::span<const double> xs, std::size_t dims) {
  const auto* circle = std::get_if<CircleFourierKernel>(&kernel.family());
  if (circle == nullptr) fail(ErrorCode::invalid_argument, kModule, "Rademacher oracle needs a circle_fourier kernel");
  require(dims >= 1 && dims <= kMaxFeatures, kModule, "feature count must lie in [1, 64]");

  const std::int64_t kmax = kernel.effective_truncation();
  std::vector<FeatureSlot> slots;
  slots.push_back({circle->a0, 0, false});
  for (std::int64_t k = 1; k <= static_cast<std::int64_t>(dims); ++k) {
    if (kmax >= 0 && k > kmax) break;
    const double half = 0.5 * circle->coefficient(k);
    slots.push_back({half, k, false});
    slots.push_back({half, k, true});
  }
  if (slots.size() < dims) {
    fail(ErrorCode::invalid_argument, kModule,
         "requested " + std::to_string(dims) + " eigenfunctions but the truncated kernel has " +
             std::to_string(slots.size()));
  }
  std::stable_sort(slots.begin(), slots.end(), [](const auto& a, const auto& b) { return a.lambda > b.lambda; });
  slots.resize(dims);

  CircleFeatures out;
  out.psi.resize(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(dims));
  out.lambda.resize(dims);
  for (std::size_t j = 0; j < dims; ++j) {
    const FeatureSlot& slot = slots[j];
    out.lambda[j] = slot.lambda;
    const double amp = slot.frequency == 0 ? std::sqrt(circle->a0) : std::sqrt(circle->coefficient(slot.frequency));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(slot.frequency) * wrap_circle(xs[i]);
      double v = amp;
      if (slot.frequency != 0) v *= slot.sine ? std::sin(angle) : std::cos(angle);
      out.psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return out;
}

EllipsoidSup sup_two_ellipsoids(const Eigen::VectorXd& c, std::span<const double> lambda, double R, double r) {
  require(static_cast<std::size_t>(c.size()) == lambda.size(), kModule, "coefficient and eigenvalue sizes differ");
  require(R >= 0.0 && r >= 0.0, kModule, "radii must be nonnegative");
  const Eigen::Index D = c.size();
  EllipsoidSup out;
  out.alpha = Eigen::VectorXd::Zero(D);
  if (R == 0.0 || c.squaredNorm() == 0.0) return out;

  if (r == 0.0) {
    // only directions with lambda_j = 0 survive
    double null_norm2 = 0.0;
    for (Eigen::Index j = 0; j < D; ++j)
      if (lambda[static_cast<std::size_t>(j)] == 0.0) null_norm2 += c[j] * c[j];
    if (null_norm2 == 0.0) return out;
    const double null_norm = std::sqrt(null_norm2);
    for (Eigen::Index j = 0; j < D; ++j)
      if (lambda[static_cast<std::size_t>(j)] == 0.0) out.alpha[j] = R * c[j] / null_norm;
    out.value = out.lower = R * null_norm;
    return out;
  }

  const double inv_R2 = 1.0 / (R * R);
  auto weight = [&](double t, Eigen::Index j) { return (1.0 - t) * inv_R2 + t * lambda[static_cast<std::size_t>(j)] / r; };
  // c^T Q_t^{-1} c; every t in [0, 1] gives an upper bound by weak duality
  auto h = [&](double t) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < D; ++j) {
      if (c[j] == 0.0) continue;
      const double q = weight(t, j);
      if (q <= 0.0) return std::numeric_limits<double>::max();
      total += c[j] * c[j] / q;
    }
    return total;
  };

  double t_best = 0.0;
  double h_best = h(0.0);
  const double h_one = h(1.0);
  if (h_one < h_best) {
    t_best = 1.0;
    h_best = h_one;
  }
  const auto [t_min, h_min] =
      boost::math::tools::brent_find_minima(h, 0.0, 1.0, std::numeric_limits<double>::digits / 2);
  if (h_min < h_best) {
    t_best = t_min;
    h_best = h_min;
  }
  out.value = std::sqrt(h_best);

  const double root = out.value;
  for (Eigen::Index j = 0; j < D; ++j) {
    const double q = weight(t_best, j);
    out.alpha[j] = (c[j] == 0.0 || q <= 0.0) ? 0.0 : c[j] / (q * root);
  }
  double norm2 = out.alpha.squaredNorm();
  double var = 0.0;
  for (Eigen::Index j = 0; j < D; ++j) var += lambda[static_cast<std::size_t>(j)] * out.alpha[j] * out.alpha[j];
  double shrink = 1.0;
  if (norm2 > R * R) shrink = std::min(shrink, R / std::sqrt(norm2));
  if (var > r) shrink = std::min(shrink, std::sqrt(r / var));
  out.alpha *= shrink;
  out.lower = c.dot(out.alpha);
  return out;
}

namespace {

double sup_for_mask(const CircleFeatures& f, std::uint64_t mask, double R, double r, Eigen::VectorXd& sigma) {
  const Eigen::Index n = f.psi.rows();
  for (Eigen::Index i = 0; i < n; ++i) sigma[i] = ((mask >> i) & 1U) ? 1.0 : -1.0;
  const Eigen::VectorXd c = f.psi.transpose() * sigma / static_cast<double>(n);
  return sup_two_ellipsoids(c, f.lambda, R, r).value;
}

}  // namespace

double rademacher_exact(const CircleFeatures& features, double R, double r) {
  const Eigen::Index n = features.psi.rows();
  require(n >= 1 && n <= 20, kModule, "exact enumeration supports 1 <= n <= 20");
  Eigen::VectorXd sigma(n);
  // sup(c) = sup(-c): the second half of the masks mirrors the first
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < half; ++mask) total += sup_for_mask(features, mask, R, r, sigma);
  return total / static_cast<double>(half);
}

MonteCarloEstimate rademacher_mc(const CircleFeatures& features, double R, double r, std::size_t n_sigma,
                                 std::uint64_t seed, bool distinct) {
  const Eigen::Index n = features.psi.rows();
  require(n >= 1, kModule, "sample must be nonempty");
  require(n_sigma >= 1, kModule, "need at least one sign vector");
  Rng rng(seed);
  Eigen::VectorXd sigma(n);

  std::vector<std::uint64_t> masks(n_sigma);
  if (distinct) {
    require(n <= 62, kModule, "distinct sign draws need n <= 62");
    const std::uint64_t universe = std::uint64_t{1} << n;
    require(n_sigma <= universe, kModule, "more distinct sign vectors requested than exist");
    if (universe <= (std::uint64_t{1} << 22)) {
      std::vector<std::uint64_t> pool(universe);
      for (std::uint64_t m = 0; m < universe; ++m) pool[m] = m;
      for (std::size_t k = 0; k < n_sigma; ++k) {
        const std::uint64_t pick = k + rng.below(universe - k);
        std::swap(pool[k], pool[pick]);
        masks[k] = pool[k];
      }
    } else {
      std::unordered_set<std::uint64_t> seen;
      for (std::size_t k = 0; k < n_sigma;) {
        const std::uint64_t m = rng.below(universe);
        if (seen.insert(m).second) masks[k++] = m;
      }
    }
  } else {
    require(n <= 64, kModule, "sign vectors are packed in 64 bits");
    for (auto& m : masks) {
      m = 0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (rng.sign() > 0) m |= std::uint64_t{1} << i;
    }
  }

  double sum = 0.0, sum2 = 0.0;
  for (std::uint64_t m : masks) {
    const double v = sup_for_mask(features, m, R, r, sigma);
    sum += v;
    sum2 += v * v;
  }
  MonteCarloEstimate out;
  out.draws = n_sigma;
  out.mean = sum / static_cast<double>(n_sigma);
  if (n_sigma > 1) {
    const double var = std::max(0.0, (sum2 - sum * out.mean) / static_cast<double>(n_sigma - 1));
    out.std_error = std::sqrt(var / static_cast<double>(n_sigma));
  }
  return out;
}

}  // namespace svmsel
