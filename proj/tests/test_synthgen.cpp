#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "svmsel/error.hpp"
#include "svmsel/synthgen.hpp"

using namespace svmsel;

TEST_CASE("regression function values") {
  const auto hg = SyntheticDist::hard_gap(1, 0.2);
  CHECK(hg.eta(0.25) == doctest::Approx(0.7));
  CHECK(hg.eta(0.75) == doctest::Approx(0.3));
  CHECK(hg.eta1() == doctest::Approx(0.3));
  CHECK(hg.bayes(0.25) == 1);
  CHECK(hg.bayes(0.75) == -1);
  CHECK(hg.bayes(0.0) == 1);
  CHECK(hg.bayes(0.5) == 1);

  const auto b = SyntheticDist::banded(1, 0.1, 0.1);
  CHECK(b.eta(0.25) == doctest::Approx(0.9));
  CHECK(b.eta(0.75) == doctest::Approx(0.1));
  CHECK(b.eta(1e-9) == doctest::Approx(0.6).epsilon(1e-6));

  const auto m3 = SyntheticDist::hard_gap(3, 0.1);
  REQUIRE(m3.breakpoints().size() == 7);
  CHECK(m3.breakpoints()[3] == doctest::Approx(0.5));
  CHECK(m3.bayes(0.1) == 1);
  CHECK(m3.bayes(0.2) == -1);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(SyntheticDist::hard_gap(0, 0.2), Error);
  CHECK_THROWS_AS(SyntheticDist::hard_gap(1, 0.0), Error);
  CHECK_THROWS_AS(SyntheticDist::hard_gap(1, 0.6), Error);
  CHECK_THROWS_AS(SyntheticDist::banded(1, 0.3, 0.3), Error);
  CHECK_THROWS_AS(SyntheticDist::banded(1, 0.0, 0.1), Error);
  CHECK_THROWS_AS(draw_sample(SyntheticDist::hard_gap(1, 0.2), 0, 1), Error);
}

TEST_CASE("margin condition holds on a fine grid") {
  for (const auto& d : {SyntheticDist::hard_gap(2, 0.15), SyntheticDist::banded(3, 0.05, 0.2)}) {
    for (int i = 0; i < 10000; ++i) {
      const double x = (i + 0.5) / 10000.0;
      const double e = d.eta(x);
      CHECK(std::abs(e - 0.5) >= d.eta0() - 1e-12);
      CHECK(std::min(e, 1.0 - e) >= d.eta1() - 1e-12);
      CHECK((e > 0.5) == (d.bayes(x) == 1));
    }
  }
}

TEST_CASE("eta only jumps at breakpoints") {
  const auto d = SyntheticDist::hard_gap(2, 0.2);
  int jumps = 0;
  const int m = 100000;
  for (int i = 1; i < m; ++i) {
    const double a = (i - 1.0) / m, b = static_cast<double>(i) / m;
    if (d.eta(a) != d.eta(b)) {
      ++jumps;
      bool near = false;
      for (double t : d.breakpoints()) near = near || (t > a - 1e-12 && t <= b + 1e-12);
      CHECK(near);
    }
  }
  CHECK(jumps == 3);  // 1/4, 1/2, 3/4
}

TEST_CASE("noiseless labels") {
  const auto d = SyntheticDist::hard_gap(1, 0.5);
  const Sample s = draw_sample(d, 2000, 5);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s.y[i] == d.bayes(s.x[i]));
}

TEST_CASE("sampling is deterministic and has the right label rate") {
  const auto d = SyntheticDist::hard_gap(1, 0.2);
  const Sample a = draw_sample(d, 100000, 42), b = draw_sample(d, 100000, 42);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(draw_sample(d, 10, 43).x != draw_sample(d, 10, 42).x);
  std::size_t agree = 0;
  double mean_x = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a.y[i] == d.bayes(a.x[i]);
    mean_x += a.x[i];
    CHECK(a.x[i] >= 0.0);
    CHECK(a.x[i] < 1.0);
  }
  CHECK(static_cast<double>(agree) / 1e5 == doctest::Approx(0.7).epsilon(0.005 / 0.7));
  CHECK(mean_x / 1e5 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("sample csv") {
  Sample s{{0.25, 0.1}, {1, -1}};
  std::ostringstream out;
  write_sample_csv(out, s);
  CHECK(out.str() == "x,y\n0.25,1\n0.1,-1\n");
}
