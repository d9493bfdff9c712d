#include "svmsel/subroot.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svmsel/error.hpp"

namespace svmsel {
namespace {
constexpr const char* kModule = "subroot";
constexpr int kMaxDoublings = 1000;
}  // namespace

bool is_subroot(const SubrootFn& psi, std::span<const double> grid, double tol) {
  double prev_value = 0.0;
  double prev_ratio = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid[i];
    require(r > 0.0, kModule, "sub-root grid must be positive");
    if (i > 0) require(r > grid[i - 1], kModule, "sub-root grid must be ascending");
    const double v = psi(r);
    if (!(v >= -tol)) return false;
    const double ratio = v / std::sqrt(r);
    if (i > 0) {
      if (v < prev_value - tol * std::max(1.0, std::abs(prev_value))) return false;
      if (ratio > prev_ratio + tol * std::max(1.0, std::abs(prev_ratio))) return false;
    }
    prev_value = v;
    prev_ratio = ratio;
  }
  return true;
}

FixedPoint solve_fixed_point(const SubrootFn& psi, double tol) {
  require(tol > 0.0, kModule, "tolerance must be positive");
  const double start = psi.domain_hint > 0.0 && std::isfinite(psi.domain_hint) ? psi.domain_hint : 1.0;

  FixedPoint out;
  double hi = start;
  double psi_hi = psi(hi);
  bool any_positive = psi_hi > 0.0;
  int doublings = 0;
  while (hi < psi_hi) {
    if (++doublings > kMaxDoublings) {
      fail(ErrorCode::convergence, kModule, "no bracket after 2^10 doublings; input is not sub-root");
    }
    hi *= 2.0;
    psi_hi = psi(hi);
    any_positive = any_positive || psi_hi > 0.0;
  }

  double lo = hi;
  double psi_lo = psi_hi;
  int halvings = 0;
  while (lo >= psi_lo) {
    if (++halvings > 1070) {
      out.value = 0.0;
      out.degenerate = true;
      out.iterations = doublings + halvings;
      return out;
    }
    hi = lo;
    psi_hi = psi_lo;
    lo *= 0.5;
    psi_lo = psi(lo);
    any_positive = any_positive || psi_lo > 0.0;
  }
  (void)any_positive;

  // Invariant: lo < psi(lo), hi >= psi(hi).
  int iterations = doublings + halvings;
  for (int it = 0; it < 2000; ++it) {
    ++iterations;
    const double mid = (hi > 4.0 * lo) ? std::sqrt(lo * hi) : lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    const double v = psi(mid);
    if (mid >= v) {
      hi = mid;
      psi_hi = v;
    } else {
      lo = mid;
    }
  }
  out.value = hi;
  out.residual = std::abs(psi_hi - hi);
  out.iterations = iterations;
  if (out.residual > tol * std::max(1.0, hi)) {
    fail(ErrorCode::convergence, kModule,
         "fixed point residual " + std::to_string(out.residual) + " exceeds tolerance; psi is not continuous");
  }
  return out;
}

SubrootFn pointwise_min(SubrootFn a, SubrootFn b) {
  const double hint = std::min(a.domain_hint, b.domain_hint);
  return SubrootFn{[a = std::move(a), b = std::move(b)](double r) { return std::min(a(r), b(r)); }, hint};
}

}  // namespace svmsel
