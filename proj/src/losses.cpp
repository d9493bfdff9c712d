#include "svmsel/losses.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <gsl/gsl_integration.h>

#include "svmsel/error.hpp"
#include "svmsel/rng.hpp"

namespace svmsel {
namespace {

constexpr const char* kModule = "losses";
constexpr std::size_t kNodes = 64;

struct GaussRule {
  std::array<double, kNodes> x{};  // on [-1, 1]
  std::array<double, kNodes> w{};
};

const GaussRule& gauss_rule() {
  static const GaussRule rule = [] {
    GaussRule r;
    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(kNodes);
    for (std::size_t i = 0; i < kNodes; ++i) gsl_integration_glfixed_point(-1.0, 1.0, i, &r.x[i], &r.w[i], table);
    gsl_integration_glfixed_table_free(table);
    return r;
  }();
  return rule;
}

struct Pair {
  double hinge = 0.0;
  double zero_one = 0.0;
};

Pair integrand(const SyntheticDist& dist, double x, double gx) {
  const double eta = dist.eta(x);
  const double floor_risk = std::min(eta, 1.0 - eta);
  Pair p;
  p.hinge = cond_hinge_risk(eta, gx) - 2.0 * floor_risk;
  p.zero_one = (gx <= 0.0 ? eta : 0.0) + (gx >= 0.0 ? 1.0 - eta : 0.0) - floor_risk;
  return p;
}

Pair integrate_panels(const ScalarFn& g, const SyntheticDist& dist, std::span<const double> edges, int split) {
  const GaussRule& rule = gauss_rule();
  Pair total;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double step = (edges[p + 1] - edges[p]) / split;
    for (int s = 0; s < split; ++s) {
      const double a = edges[p] + s * step;
      const double half = 0.5 * step;
      const double mid = a + half;
      for (std::size_t i = 0; i < kNodes; ++i) {
        const double x = mid + half * rule.x[i];
        const Pair v = integrand(dist, x, g(x));
        total.hinge += half * rule.w[i] * v.hinge;
        total.zero_one += half * rule.w[i] * v.zero_one;
      }
    }
  }
  return total;
}

double bisect_root(const ScalarFn& h, double a, double b, double ha) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (!(mid > a && mid < b)) break;
    const double hm = h(mid);
    if ((hm > 0.0) == (ha > 0.0)) {
      a = mid;
      ha = hm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

// Locations inside (lo, hi) where g crosses 0, 1 or -1, found on a uniform scan.
void find_crossings(const ScalarFn& g, double lo, double hi, std::vector<double>& out) {
  constexpr int kScan = 32;
  constexpr std::array<double, 3> levels{0.0, 1.0, -1.0};
  std::array<double, kScan + 1> xs{}, gs{};
  for (int k = 0; k <= kScan; ++k) {
    xs[k] = lo + (hi - lo) * k / kScan;
    gs[k] = g(xs[k]);
  }
  for (double level : levels) {
    ScalarFn shifted = [&g, level](double x) { return g(x) - level; };
    for (int k = 0; k < kScan; ++k) {
      const double a = gs[k] - level, b = gs[k + 1] - level;
      if ((a > 0.0) != (b > 0.0)) {
        const double root = bisect_root(shifted, xs[k], xs[k + 1], a);
        if (root > lo && root < hi) out.push_back(root);
      }
    }
  }
}

}  // namespace

double cond_hinge_risk(double eta, double g) {
  if (!(eta >= 0.0 && eta <= 1.0)) fail(ErrorCode::domain, kModule, "eta must lie in [0, 1], got " + std::to_string(eta));
  return eta * hinge(g) + (1.0 - eta) * hinge(-g);
}

RiskReport relative_risks(const ScalarFn& g, const SyntheticDist& dist, const QuadratureOptions& opts) {
  require(opts.tol > 0.0, kModule, "quadrature tolerance must be positive");
  std::vector<double> edges(dist.breakpoints().begin(), dist.breakpoints().end());
  for (double k : opts.kinks) {
    const double w = wrap_circle(k);
    edges.push_back(w);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<double> crossings;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) find_crossings(g, edges[p], edges[p + 1], crossings);
  edges.insert(edges.end(), crossings.begin(), crossings.end());
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  RiskReport out;
  out.method = RiskReport::Method::quadrature;
  Pair prev = integrate_panels(g, dist, edges, 1);
  for (int level = 1; level <= opts.max_levels; ++level) {
    const Pair next = integrate_panels(g, dist, edges, 1 << level);
    const double change = std::max(std::abs(next.hinge - prev.hinge), std::abs(next.zero_one - prev.zero_one));
    prev = next;
    if (change <= opts.tol) {
      out.rel_hinge = next.hinge;
      out.rel_01 = next.zero_one;
      out.error_estimate = change;
      return out;
    }
  }
  fail(ErrorCode::convergence, kModule, "quadrature did not reach tolerance after panel doubling");
}

RiskReport relative_risks(const RepresenterFn& f, const SyntheticDist& dist, double tol) {
  QuadratureOptions opts;
  opts.tol = tol;
  opts.kinks.assign(f.anchors().begin(), f.anchors().end());
  return relative_risks([&f](double x) { return f(x); }, dist, opts);
}

double rel_hinge_risk(const ScalarFn& g, const SyntheticDist& dist) { return relative_risks(g, dist).rel_hinge; }

double rel_01_risk(const ScalarFn& g, const SyntheticDist& dist) { return relative_risks(g, dist).rel_01; }

RiskReport relative_risks_mc(const ScalarFn& g, const SyntheticDist& dist, std::size_t draws, std::uint64_t seed) {
  require(draws >= 2, kModule, "Monte Carlo needs at least two draws");
  Rng rng(seed);
  double sh = 0.0, sh2 = 0.0, sz = 0.0, sz2 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double x = rng.uniform();
    const int y = rng.bernoulli(dist.eta(x)) ? 1 : -1;
    const double gx = g(x);
    const int s = dist.bayes(x);
    const double h = hinge(y * gx) - hinge(static_cast<double>(y * s));
    const double z = zero_one(y * gx) - zero_one(static_cast<double>(y * s));
    sh += h;
    sh2 += h * h;
    sz += z;
    sz2 += z * z;
  }
  const double n = static_cast<double>(draws);
  RiskReport out;
  out.method = RiskReport::Method::monte_carlo;
  out.rel_hinge = sh / n;
  out.rel_01 = sz / n;
  out.hinge_std_error = std::sqrt(std::max(0.0, (sh2 - sh * out.rel_hinge) / (n - 1.0)) / n);
  out.zero_one_std_error = std::sqrt(std::max(0.0, (sz2 - sz * out.rel_01) / (n - 1.0)) / n);
  out.error_estimate = std::max(out.hinge_std_error, out.zero_one_std_error);
  return out;
}

double empirical_hinge(std::span<const double> values, std::span<const int> labels) {
  require(!values.empty() && values.size() == labels.size(), kModule, "values and labels must be nonempty and aligned");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) total += hinge(labels[i] * values[i]);
  return total / static_cast<double>(values.size());
}

double empirical_hinge(const ScalarFn& g, const Sample& sample) {
  std::vector<double> values(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) values[i] = g(sample.x[i]);
  return empirical_hinge(values, sample.y);
}

}  // namespace svmsel
