#include <doctest.h>

#include <chrono>
#include <cmath>
#include <vector>

#include "svmsel/error.hpp"
#include "svmsel/selection.hpp"

using namespace svmsel;

namespace {

PenaltyCalibration cal_for(const KernelSpec& k, const SpectrumModel& spec, double n, const Phi& phi,
                           double delta = 0.05, double eta0 = 0.2, double eta1 = 0.3) {
  CalibrationInputs in;
  in.spectrum = &spec;
  in.n = n;
  in.delta = delta;
  in.eta0 = eta0;
  in.eta1 = eta1;
  in.M = k.sup_bound();
  in.phi = phi;
  return calibrate(in);
}

}  // namespace

TEST_CASE("calibration table") {
  const auto k = KernelSpec::circle_fourier(1.0, 1.0, 1.0);
  const auto spec = analytic_spectrum(k);
  const double M = k.sup_bound();
  const PenaltyCalibration cal = cal_for(k, spec, 1024, Phi::linear());
  REQUIRE(cal.rows.size() == 11);
  CHECK(cal.x_R == doctest::Approx(std::log(12.0)));
  double mass = 0.0;
  for (std::size_t i = 0; i < cal.rows.size(); ++i) {
    CHECK(cal.rows[i].R == doctest::Approx(std::ldexp(1.0, static_cast<int>(i)) / M));
    mass += std::exp(-cal.x_R);
  }
  CHECK(mass <= 1.0);
  const double expected = gamma_s1(spec, 1024, 0.3, M) + std::log(std::log(1024.0) / 0.05) / (0.3 * 1024);
  CHECK(cal.Lambda == doctest::Approx(expected).epsilon(1e-12));
  CHECK(cal.additive() == doctest::Approx(1.0 / (0.3 * 0.2)));
  CHECK(cal.Lambda >= 1.0 / 1024);

  for (const Phi& phi : {Phi::linear(), Phi::quadratic()}) {
    const PenaltyCalibration c2 = cal_for(k, spec, 300, phi);
    double prev = -1.0;
    for (double R = 0.0; R < 300.0; R += 0.37) {
      CHECK(c2.pen(R) >= prev);
      prev = c2.pen(R);
      CHECK(c2.rho(R) >= 0.0);
      CHECK(c2.pen(R) == doctest::Approx(c2.Lambda * (phi(M * R / 2) + c2.additive())));
    }
    for (const PenaltyRow& row : c2.rows) CHECK(row.pen == doctest::Approx(c2.pen(row.R)));
  }
}

TEST_CASE("calibration edge cases") {
  const auto spec = SpectrumModel::from_eigenvalues({0.0});
  CalibrationInputs in;
  in.spectrum = &spec;
  in.n = 2;
  in.delta = 0.5;
  const PenaltyCalibration cal = calibrate(in);
  // log(log(2)/0.5) < 1, so the log factor is clamped at 1
  CHECK(cal.gamma == 0.0);
  CHECK(cal.Lambda == doctest::Approx(1.0 / (0.3 * 2.0)));
  CHECK(cal.rows.size() == 2);

  in.delta = 1.5;
  CHECK_THROWS_AS(calibrate(in), Error);
  in.delta = 0.05;
  in.spectrum = nullptr;
  CHECK_THROWS_AS(calibrate(in), Error);
}

TEST_CASE("duplicate kernels tie to the lower index") {
  const auto k = KernelSpec::circle_fourier(1.0, 1.0, 1.0);
  const auto spec = analytic_spectrum(k);
  const Sample s = draw_sample(SyntheticDist::hard_gap(1, 0.2), 128, 4);
  const PenaltyCalibration one = cal_for(k, spec, 128, Phi::linear(), 0.05);
  const PenaltyCalibration half = cal_for(k, spec, 128, Phi::linear(), 0.025);
  const SelectionResult single = select_model(s, {k}, {one});
  const SelectionResult twice = select_model(s, {k, k}, {half, half});
  CHECK(twice.kernel_index == 0);
  CHECK(twice.rows.size() == 2 * single.rows.size());
  std::size_t chosen = 0;
  for (const SelectionRow& r : twice.rows) chosen += r.chosen;
  CHECK(chosen == 1);
  // the stricter delta shifts every penalty by the same amount, so R_hat is unchanged
  CHECK(twice.R_hat == single.R_hat);
  for (const SelectionRow& r : single.rows) {
    CHECK(r.penalized == doctest::Approx(r.emp_hinge + r.pen));
    if (!r.chosen) {
      bool beaten = false;
      for (const SelectionRow& q : single.rows) beaten = beaten || (q.chosen && q.penalized <= r.penalized + 1e-9);
      CHECK(beaten);
    }
  }
  CHECK_THROWS_AS(select_model(s, {k, k}, {one}), Error);
}

TEST_CASE("a planted kernel is selected") {
  // B is nearly constant and cannot follow the sign changes of eta
  const auto a = KernelSpec::circle_fourier(1.0, 1.0, 1.0);
  const auto b = KernelSpec::circle_fourier(1.0, 1e-6, 1.0);
  const auto sa = analytic_spectrum(a), sb = analytic_spectrum(b);
  const auto dist = SyntheticDist::hard_gap(1, 0.45);
  const double n = 128;
  const PenaltyCalibration ca = cal_for(a, sa, n, Phi::linear(), 0.025, 0.45, 0.05);
  const PenaltyCalibration cb = cal_for(b, sb, n, Phi::linear(), 0.025, 0.45, 0.05);
  int hits = 0;
  const int trials = 50;
  for (int seed = 0; seed < trials; ++seed) {
    const Sample s = draw_sample(dist, static_cast<std::size_t>(n), 1000 + seed);
    hits += select_model(s, {a, b}, {ca, cb}).kernel_index == 0;
  }
  CHECK(hits >= 0.9 * trials);
}

TEST_CASE("regularized fits pass the approximate-minimizer certificate") {
  const auto k = KernelSpec::circle_fourier(1.0, 1.0, 1.0);
  const auto spec = analytic_spectrum(k);
  for (const Phi& phi : {Phi::linear(), Phi::quadratic()}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const Sample s = draw_sample(SyntheticDist::banded(1, 0.1, 0.2), 150, seed);
      const ConstrainedSolver solver(s, k);
      const PenaltyCalibration cal = cal_for(k, spec, 150, phi, 0.05, 0.1, 0.2);
      TrainConfig cfg;
      cfg.phi = phi;
      cfg.Lambda = cal.Lambda;
      const FitResult fit = train_regularized(solver, cfg);
      const Certificate cert = approx_minimizer_certificate(fit, solver, cal);
      CHECK(cert.passed);
      CHECK(cert.lhs <= cert.rhs + 1e-6);
    }
  }
}

TEST_CASE("oracle right-hand side") {
  const auto k = KernelSpec::circle_fourier(1.0, 1.0, 1.0);
  const auto spec = analytic_spectrum(k);
  const double M = k.sup_bound();
  OracleReference ref;
  ref.radii = {0.0, 0.5, 1.0, 2.0};
  ref.norms = {0.0, 0.5, 1.0, 1.9};
  ref.risks = {0.4, 0.2, 0.1, 0.05};
  ref.n_ref = 100;
  PenaltyCalibration cal = cal_for(k, spec, 512, Phi::linear());
  for (const Phi& phi : {Phi::linear(), Phi::quadratic()}) {
    double best = INFINITY;
    for (std::size_t i = 0; i < ref.radii.size(); ++i)
      best = std::min(best, ref.risks[i] + 2 * cal.Lambda * phi(2 * M * ref.norms[i]));
    const double expected = 2 * best + 4 * cal.Lambda * (2 * phi(2.0) + 1.0 / (cal.w1 * cal.eta0));
    CHECK(oracle_rhs(ref, cal, phi) == doctest::Approx(expected).epsilon(1e-12));
  }
  // every nonzero norm has 2 M |f| >= 1/2, where linear <= quadratic
  CHECK(oracle_rhs(ref, cal, Phi::linear()) <= oracle_rhs(ref, cal, Phi::quadratic()));
  double prev = 0.0;
  for (double Lambda : {1e-4, 1e-3, 1e-2, 0.1}) {
    cal.Lambda = Lambda;
    const double v = oracle_rhs(ref, cal, Phi::quadratic());
    CHECK(v > prev);
    prev = v;
  }
  CHECK(oracle_rhs(ref, cal, Phi::linear(), true) < oracle_rhs(ref, cal, Phi::linear(), false));
}

TEST_CASE("oracle reference risks are exact for the trained functions") {
  const auto k = KernelSpec::circle_fourier(1.0, 1.0, 1.0);
  const auto dist = SyntheticDist::hard_gap(1, 0.2);
  const OracleReference ref = build_oracle_reference(dist, k, {0.5, 2.0}, 200, 7);
  REQUIRE(ref.radii.size() == 3);
  CHECK(ref.radii[0] == 0.0);
  CHECK(ref.risks[0] == doctest::Approx(0.4).epsilon(1e-9));
  for (std::size_t i = 1; i < ref.radii.size(); ++i) {
    CHECK(ref.norms[i] <= ref.radii[i] * (1 + 1e-9));
    CHECK(ref.risks[i] >= 0.0);
  }
}
