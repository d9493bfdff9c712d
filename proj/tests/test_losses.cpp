#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "svmsel/error.hpp"
#include "svmsel/losses.hpp"
#include "svmsel/rng.hpp"

using namespace svmsel;

TEST_CASE("conditional hinge risk") {
  CHECK(cond_hinge_risk(0.7, 1.0) == doctest::Approx(0.6));
  CHECK(cond_hinge_risk(0.7, 0.0) == doctest::Approx(1.0));
  CHECK(cond_hinge_risk(0.2, 3.0) == doctest::Approx(0.8 * 4.0));
  CHECK_THROWS_AS(cond_hinge_risk(1.2, 0.0), Error);
  CHECK_THROWS_AS(cond_hinge_risk(-0.1, 0.0), Error);
}

TEST_CASE("the conditional minimizer is the Bayes sign") {
  // at eta in {0, 1} the minimizer is not unique
  for (int i = 1; i < 100; ++i) {
    const double eta = i / 100.0;
    if (i == 50) continue;
    CHECK(oracle::argmin_cond_hinge(eta) == (eta > 0.5 ? 1.0 : -1.0));
  }
}

TEST_CASE("constant functions on the hard-gap distribution") {
  const auto d = SyntheticDist::hard_gap(1, 0.2);
  const RiskReport half = relative_risks([](double) { return 0.5; }, d);
  CHECK(half.rel_hinge == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(half.rel_01 == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(rel_hinge_risk([](double) { return 0.0; }, d) == doctest::Approx(0.4).epsilon(1e-10));
  // a zero margin counts as an error for either label
  CHECK(rel_01_risk([](double) { return 0.0; }, d) == doctest::Approx(0.7).epsilon(1e-10));
  const RiskReport bayes = relative_risks([&](double x) { return static_cast<double>(d.bayes(x)); }, d);
  CHECK(std::abs(bayes.rel_hinge) < 1e-10);
  CHECK(std::abs(bayes.rel_01) < 1e-10);
}

TEST_CASE("quadrature agrees with an independent Riemann sum") {
  const auto d = SyntheticDist::banded(2, 0.05, 0.15);
  const auto g = [](double x) { return 1.3 * std::sin(2 * std::numbers::pi * x) + 0.2; };
  double hinge = 0.0, zo = 0.0;
  const int m = 400000;
  for (int i = 0; i < m; ++i) {
    const double x = (i + 0.5) / m, e = d.eta(x), s = d.bayes(x);
    hinge += cond_hinge_risk(e, g(x)) - cond_hinge_risk(e, s);
    if ((g(x) > 0 ? 1 : -1) != s) zo += std::abs(2 * e - 1);
  }
  const RiskReport q = relative_risks(g, d);
  CHECK(q.rel_hinge == doctest::Approx(hinge / m).epsilon(1e-6));
  CHECK(q.rel_01 == doctest::Approx(zo / m).epsilon(1e-4));
  const RiskReport mc = relative_risks_mc(g, d, 200000, 11);
  CHECK(std::abs(mc.rel_hinge - q.rel_hinge) < 5 * mc.hinge_std_error);
  CHECK(std::abs(mc.rel_01 - q.rel_01) < 5 * mc.zero_one_std_error);
}

TEST_CASE("zero-one excess is dominated by hinge excess for representers") {
  Rng rng(31);
  const auto k = KernelSpec::circle_fourier(1.0, 1.0, 1.0);
  for (int t = 0; t < 60; ++t) {
    const auto d = t % 2 ? SyntheticDist::hard_gap(1 + rng.below(3), rng.uniform(0.05, 0.5))
                         : SyntheticDist::banded(1 + rng.below(3), 0.05, 0.1);
    std::vector<double> a(2 + rng.below(10)), c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.uniform();
      c[i] = rng.normal() * 0.5;
    }
    const RepresenterFn f(k, a, c);
    const RiskReport r = relative_risks(f, d);
    CHECK(r.rel_01 <= r.rel_hinge + 1e-8);
    CHECK(r.rel_01 >= -1e-12);
  }
}

TEST_CASE("empirical hinge") {
  const std::vector<double> v{2.0, 0.5, -1.0};
  const std::vector<int> y{1, 1, 1};
  CHECK(empirical_hinge(v, y) == doctest::Approx((0.0 + 0.5 + 2.0) / 3.0));
  Sample s{{0.1, 0.2}, {1, -1}};
  CHECK(empirical_hinge([](double) { return 1.0; }, s) == doctest::Approx(1.0));
}
