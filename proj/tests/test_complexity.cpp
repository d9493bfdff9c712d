#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "svmsel/complexity.hpp"
#include "svmsel/error.hpp"
#include "svmsel/rng.hpp"

using namespace svmsel;

namespace {

// eta1^-1 n^-1/2 min over every d of d/sqrt(n) + (eta1/M) sqrt(tail(d))
double gamma_brute(const std::vector<double>& lambda, double n, double eta1, double M) {
  double best = INFINITY;
  for (std::size_t d = 0; d <= lambda.size(); ++d)
    best = std::min(best, d / std::sqrt(n) + eta1 / M * std::sqrt(oracle::tail(lambda, d)));
  return best / (eta1 * std::sqrt(n));
}

double simpson(const std::function<double(double)>& f, double a, double b, int m) {
  const double h = (b - a) / (2 * m);
  double s = f(a) + f(b);
  for (int i = 1; i < 2 * m; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("gamma_s1 equals a full scan over d") {
  Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    std::vector<double> lambda(1 + rng.below(300));
    for (double& v : lambda) v = std::exp(rng.uniform(-12.0, 1.0));
    std::sort(lambda.rbegin(), lambda.rend());
    const auto spec = SpectrumModel::from_eigenvalues(lambda);
    const double n = std::exp(rng.uniform(1.0, 12.0));
    const double eta1 = rng.uniform(0.05, 0.5), M = rng.uniform(0.5, 3.0);
    CHECK(gamma_s1(spec, n, eta1, M) == doctest::Approx(gamma_brute(lambda, n, eta1, M)).epsilon(1e-13));
  }
}

TEST_CASE("gamma_s1 on the circle spectrum equals a long scan") {
  const auto spec = analytic_spectrum(KernelSpec::circle_fourier(1.0, 1.0, 1.0));
  for (double n : {256.0, 4096.0, 65536.0}) {
    double best = INFINITY;
    for (std::size_t d = 0; d < 5000; ++d) best = std::min(best, d / std::sqrt(n) + 0.3 * std::sqrt(spec.tail_sum(d)));
    CHECK(gamma_s1(spec, n, 0.3, 1.0) == doctest::Approx(best / (0.3 * std::sqrt(n))).epsilon(1e-13));
  }
}

TEST_CASE("gamma_s1 of a zero spectrum is zero") {
  const auto spec = SpectrumModel::from_eigenvalues({0.0, 0.0});
  CHECK(gamma_s1(spec, 100.0, 0.3, 1.0) == 0.0);
}

TEST_CASE("power-law entropy integral") {
  for (double s : {1.0, 2.0, 3.5}) {
    const auto em = EntropyModel::power_law(s, 2.0);
    for (double x : {0.01, 0.3, 2.0}) {
      // substitute eps = x t^2 to remove the endpoint singularity
      const double num = simpson(
          [&](double t) {
            return t == 0.0 ? (s == 1.0 ? 2.0 * x * std::sqrt(2.0) * std::pow(x, -0.5) : 0.0)
                            : std::sqrt(2.0 * std::pow(x * t * t, -1.0 / s)) * 2.0 * x * t;
          },
          0.0, 1.0, 200000);
      CHECK(xi(em, x) == doctest::Approx(num).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(EntropyModel::power_law(0.5), Error);
}

TEST_CASE("tabulated entropy is a step function") {
  const auto em = EntropyModel::table({0.1, 0.5}, {4.0, 1.0});
  CHECK(em.entropy(0.05) == 4.0);
  CHECK(em.entropy(0.1) == 4.0);
  CHECK(em.entropy(0.2) == 1.0);
  CHECK(em.entropy(0.6) == 0.0);
  CHECK(xi(em, 0.3) == doctest::Approx(0.2 + 0.2));
  CHECK(xi(em, 1.0) == doctest::Approx(0.2 + 0.4));
  for (double n : {10.0, 1e3, 1e6}) {
    const double x = x_star(em, n, 1.5);
    CHECK(xi(em, x) == doctest::Approx(std::sqrt(n) * x * x / 1.5).epsilon(1e-9));
  }
  CHECK_THROWS_AS(EntropyModel::table({0.5, 0.1}, {1.0, 1.0}), Error);
}

TEST_CASE("x_star solves the critical equation for power laws") {
  const auto em = EntropyModel::power_law(1.0, 1.0);
  for (double n : {16.0, 1e4, 1e8}) {
    const double x = x_star(em, n, 2.0);
    CHECK(xi(em, x) == doctest::Approx(std::sqrt(n) * x * x / 2.0).epsilon(1e-12));
  }
  // gamma_s2 ~ n^{-2s/(2s+1)}
  for (double s : {1.0, 2.0}) {
    const auto e = EntropyModel::power_law(s, 3.0);
    const double slope = std::log(gamma_s2(e, 1e6, 1.0) / gamma_s2(e, 1e2, 1.0)) / std::log(1e4);
    CHECK(slope == doctest::Approx(-2.0 * s / (2.0 * s + 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("phi_R is sub-root and its fixed point is consistent") {
  const auto spec = analytic_spectrum(KernelSpec::circle_fourier(1.0, 1.0, 1.0), 2000);
  std::vector<double> grid;
  for (int i = -60; i <= 20; ++i) grid.push_back(std::pow(10.0, i / 6.0));
  for (double R : {0.0, 0.5, 4.0}) {
    const SubrootFn phi = phi_r_s1(spec, R, 512.0);
    CHECK(is_subroot(phi, grid));
    const ModelParams p = model_params(Setting::s1, std::max(R, 1e-3), 1.6, 0.2, 0.3);
    const double r = r_star_exact_s1(p.C_R, spec, R, 512.0);
    CHECK(r == doctest::Approx(p.C_R * phi(r)).epsilon(1e-9));
  }
}

TEST_CASE("model parameters") {
  const ModelParams s1 = model_params(Setting::s1, 2.0, 1.5, 0.2, 0.25);
  CHECK(s1.b_R == doctest::Approx(4.0));
  CHECK(s1.C_R == doctest::Approx(2.0 * (3.0 / 0.25 + 5.0)));
  const ModelParams s2 = model_params(Setting::s2, 2.0, 1.5, 0.2, 0.25);
  CHECK(s2.C_R == doctest::Approx(3.0 + 5.0));
  CHECK_THROWS_AS(model_params(Setting::s1, 1.0, 1.0, 0.2, 0.0), Error);
}

TEST_CASE("localized bounds are ordered") {
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> lambda(1 + rng.below(20));
    for (double& v : lambda) v = std::exp(rng.uniform(-8.0, 0.0));
    const auto spec = SpectrumModel::from_eigenvalues(lambda);
    const double R = std::exp(rng.uniform(-2.0, 2.0)), r = std::exp(rng.uniform(-6.0, 1.0));
    const double n = 1.0 + rng.below(100);
    CHECK(localized_bound_inf(spec, R, r, n) <= localized_bound_sum(spec, R, r, n) * (1 + 1e-12));
  }
  const auto infinite = analytic_spectrum(KernelSpec::circle_fourier(1.0, 1.0, 1.0), 100);
  CHECK_THROWS_AS(localized_bound_sum(infinite, 1.0, 0.1, 10.0), Error);
}

TEST_CASE("two-ellipsoid supremum against a grid search in 2-d") {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd c(2);
    c << rng.normal(), rng.normal();
    const std::vector<double> lambda{rng.uniform(0.1, 1.0), rng.uniform(0.001, 0.1)};
    const double R = rng.uniform(0.2, 2.0), r = rng.uniform(0.001, 0.5);
    double best = 0.0;
    const int m = 1500;
    for (int i = 0; i <= m; ++i) {
      for (int j = 0; j <= m; ++j) {
        const double a = -R + 2.0 * R * i / m, b = -R + 2.0 * R * j / m;
        if (a * a + b * b <= R * R && lambda[0] * a * a + lambda[1] * b * b <= r) best = std::max(best, c[0] * a + c[1] * b);
      }
    }
    const EllipsoidSup sup = sup_two_ellipsoids(c, lambda, R, r);
    CHECK(sup.value >= best - 1e-12);
    CHECK(sup.value <= best + 4.0 * R / m * c.norm());
    CHECK(sup.lower <= sup.value * (1 + 1e-12));
    CHECK(sup.value - sup.lower <= 1e-7 * std::max(1.0, sup.value));
    CHECK(sup.alpha.squaredNorm() <= R * R * (1 + 1e-12));
    CHECK(lambda[0] * sup.alpha[0] * sup.alpha[0] + lambda[1] * sup.alpha[1] * sup.alpha[1] <= r * (1 + 1e-12));
  }
}

TEST_CASE("one-dimensional supremum and exact Rademacher average") {
  const auto k = KernelSpec::circle_fourier(1.0, 1.0, 1.0);
  const std::vector<double> xs{0.1, 0.35, 0.5, 0.8, 0.95};
  const CircleFeatures f = circle_features(k, xs, 1);
  REQUIRE(f.lambda.size() == 1);
  const double R = 0.7, r = 0.2;
  const double scale = std::min(R, std::sqrt(r / f.lambda[0]));
  Eigen::VectorXd c(1);
  c << -0.4;
  CHECK(sup_two_ellipsoids(c, f.lambda, R, r).value == doctest::Approx(0.4 * scale).epsilon(1e-10));

  double total = 0.0;
  const std::size_t n = xs.size();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += ((mask >> i) & 1 ? 1.0 : -1.0) * f.psi(static_cast<Eigen::Index>(i), 0);
    total += std::abs(s) * scale / static_cast<double>(n);
  }
  CHECK(rademacher_exact(f, R, r) == doctest::Approx(total / (1u << n)).epsilon(1e-10));
}

TEST_CASE("circle features reproduce the truncated kernel") {
  const auto k = KernelSpec::circle_fourier(1.0, 2.0, 1.5);
  Rng rng(9);
  std::vector<double> xs(6);
  for (double& x : xs) x = rng.uniform();
  const CircleFeatures f = circle_features(k, xs, 5);  // a0 and two cosine pairs
  const Eigen::MatrixXd approx = f.psi * f.psi.transpose();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double z = xs[i] - xs[j];
      const double expected = 1.0 + 2.0 * std::cos(2 * std::numbers::pi * z) +
                              2.0 * std::pow(2.0, -3.0) * std::cos(4 * std::numbers::pi * z);
      CHECK(approx(i, j) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("Monte Carlo over all distinct sign vectors is exact") {
  const auto k = KernelSpec::circle_fourier(1.0, 1.0, 1.0);
  const std::vector<double> xs{0.05, 0.2, 0.45, 0.6, 0.9, 0.97};
  const CircleFeatures f = circle_features(k, xs, 4);
  const double exact = rademacher_exact(f, 1.0, 0.1);
  const MonteCarloEstimate mc = rademacher_mc(f, 1.0, 0.1, 64, 3, true);
  CHECK(mc.mean == doctest::Approx(exact).epsilon(1e-12));
  const MonteCarloEstimate rough = rademacher_mc(f, 1.0, 0.1, 4000, 3, false);
  CHECK(std::abs(rough.mean - exact) <= 5.0 * rough.std_error);
}

TEST_CASE("the closed-form fixed-point bound dominates the exact fixed point") {
  const auto k = KernelSpec::circle_fourier(1.0, 1.0, 1.0);
  const auto spec = analytic_spectrum(k);
  const double M = k.sup_bound();
  for (double n : {64.0, 512.0, 4096.0}) {
    for (double eta1 : {0.05, 0.3, 0.5}) {
      for (int j = 0; j <= static_cast<int>(std::ceil(std::log2(n))); ++j) {
        const double R = std::ldexp(1.0, j) / M;
        const ModelParams p = model_params(Setting::s1, R, M, 0.2, eta1);
        CHECK(r_star_exact_s1(p.C_R, spec, R, n) <= r_star_bound_s1(p.C_R, spec, n, eta1, M));
      }
    }
  }
}
