// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "svmsel/config.hpp"
#include "svmsel/experiment.hpp"
#include "svmsel/losses.hpp"
#include "svmsel/rng.hpp"
#include "svmsel/selection.hpp"
#include "svmsel/solver.hpp"
#include "svmsel/subroot.hpp"

using namespace svmsel;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ExperimentConfig config_for(ExperimentKind kind) {
  ExperimentConfig cfg = default_config();
  cfg.kind = kind;
  return cfg;
}

Outcome spectrum_check() {
  const auto k = KernelSpec::circle_fourier(1.0, 1.0, 1.0);
  const auto spec = analytic_spectrum(k);
  // exact up to the last bit of the power evaluation
  double dev = std::abs(spec.eigenvalue(1) - 1.0);
  for (int j = 1; j <= 2000; ++j) {
    const double half = 0.5 / (static_cast<double>(j) * j);
    dev = std::max({dev, std::abs(spec.eigenvalue(2 * j) / half - 1.0), std::abs(spec.eigenvalue(2 * j + 1) / half - 1.0)});
  }
  const bool exact = dev <= 4e-16;
  ExperimentConfig cfg = config_for(ExperimentKind::spectrum);
  cfg.n_values = {2000};
  cfg.replicates = 20;
  const json stats = run_experiment(cfg).summary.at("statistics");
  const double err = stats.at(0).at("max_median_rel_error").get<double>();
  return {exact && err < 0.1, fmt("mapping max rel deviation %.2g", dev) + fmt(", worst top-5 median rel error %.4f", err)};
}

Outcome gamma_check() {
  ExperimentConfig cfg = config_for(ExperimentKind::gamma);
  cfg.n_values.clear();
  for (int e = 8; e <= 16; ++e) cfg.n_values.push_back(std::size_t{1} << e);
  cfg.eta1 = 0.3;
  const json stats = run_experiment(cfg).summary.at("statistics").at(0);
  const double s1 = stats.at("gamma_s1").at("slope").get<double>();
  const double s2 = stats.at("gamma_s2").at("slope").get<double>();
  return {std::abs(s1 + 2.0 / 3.0) <= 0.05 && std::abs(s2 + 2.0 / 3.0) <= 1e-6,
          fmt("gamma_s1 slope %.4f", s1) + fmt(", gamma_s2 slope %.9f", s2)};
}

Outcome subroot_check() {
  Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double a = std::exp(rng.uniform(-5.0, 5.0)), b = std::exp(rng.uniform(-5.0, 5.0));
    const SubrootFn psi{[=](double r) { return a * std::sqrt(r) + b; }, 1.0};
    const double expected = std::pow((a + std::sqrt(a * a + 4 * b)) / 2, 2);
    worst = std::max(worst, std::abs(solve_fixed_point(psi).value - expected) / expected);
  }
  return {worst <= 1e-8, fmt("max relative error %.2e", worst)};
}

Outcome rademacher_check() {
  ExperimentConfig cfg = config_for(ExperimentKind::rademacher_check);
  cfg.n_values = {4, 7, 10};
  const ExperimentReport rep = run_experiment(cfg);
  const json& stats = rep.summary.at("statistics");
  std::size_t order = 0;
  for (std::size_t i = 0; i < rep.rows.size(); ++i)
    order += rep.rows.number(i, "bound_inf") > rep.rows.number(i, "bound_sum") * (1 + 1e-12);
  const auto inf_v = stats.at("inf_bound_violations").get<std::size_t>();
  const auto sum_v = stats.at("sum_bound_violations").get<std::size_t>();
  return {rep.rows.size() == 27 && inf_v == 0 && sum_v == 0 && order == 0,
          std::to_string(rep.rows.size()) + " cells, violations " + std::to_string(inf_v + sum_v + order) +
              fmt(", max estimate / inf bound %.4f", stats.at("max_estimate_over_inf_bound").get<double>())};
}

Outcome loss_check() {
  Rng rng(77);
  const auto k = KernelSpec::circle_fourier(1.0, 1.0, 1.0);
  std::size_t violations = 0;
  double worst = -INFINITY;
  for (int t = 0; t < 1000; ++t) {
    const auto dist = t % 2 ? SyntheticDist::hard_gap(1 + rng.below(3), rng.uniform(0.05, 0.5))
                            : SyntheticDist::banded(1 + rng.below(3), rng.uniform(0.02, 0.2), rng.uniform(0.02, 0.2));
    std::vector<double> a(1 + rng.below(20)), c(a.size());
    const double scale = std::exp(rng.uniform(-3.0, 1.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.uniform();
      c[i] = scale * rng.normal();
    }
    const RiskReport r = relative_risks(RepresenterFn(k, a, c), dist);
    worst = std::max(worst, r.rel_01 - r.rel_hinge);
    violations += r.rel_01 > r.rel_hinge + 1e-8;
  }
  std::size_t argmin_bad = 0;
  for (int i = 1; i < 200; ++i) {
    if (i == 100) continue;
    const double eta = i / 200.0;
    argmin_bad += oracle::argmin_cond_hinge(eta) != (eta > 0.5 ? 1.0 : -1.0);
  }
  return {violations == 0 && argmin_bad == 0, std::to_string(violations) + " risk violations" +
                                                  fmt(" (max Theta - L %.3g), ", worst) + std::to_string(argmin_bad) +
                                                  " argmin mismatches"};
}

Outcome solver_check() {
  Rng rng(606);
  const auto k = KernelSpec::circle_fourier(1.0, 1.0, 1.0);
  double worst_dual = 0.0, worst_cut = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Sample s = draw_sample(SyntheticDist::hard_gap(1 + rng.below(2), 0.2), 10 + rng.below(41), 500 + t);
    TrainConfig cfg;
    cfg.phi = Phi::quadratic();
    cfg.Lambda = std::exp(rng.uniform(-6.0, -1.0));
    const FitResult fit = train_regularized(s, k, cfg);
    const DualResult d = dual_svm0_crosscheck(s, k, cfg.Lambda);
    worst_dual = std::max(worst_dual, std::abs(fit.objective - d.objective) / d.objective);
  }
  for (int t = 0; t < 20; ++t) {
    Sample s;
    for (std::size_t i = 0, n = 1 + rng.below(6); i < n; ++i) {
      s.x.push_back(rng.uniform());
      s.y.push_back(rng.sign());
    }
    Eigen::MatrixXd K(s.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j) K(i, j) = k(s.x[i], s.x[j]);
    const ConstrainedSolver solver(s, k);
    for (double R : {0.1, 0.5, 2.0}) {
      const double ref = oracle::constrained_hinge(K, s.y, R, 6000);
      // the mean hinge is at most 1 here, so this is an absolute error near separable draws
      worst_cut = std::max(worst_cut, std::abs(solver.solve(R).emp_hinge - ref) / std::max(ref, 1.0));
    }
  }
  return {worst_dual <= 1e-4 && worst_cut <= 1e-4,
          fmt("dual rel gap %.2e", worst_dual) + fmt(", cutting-plane gap %.2e", worst_cut)};
}

Outcome oracle_check() {
  ExperimentConfig cfg = config_for(ExperimentKind::verify_oracle);
  cfg.n_values = {512};
  cfg.replicates = 200;
  const json stats = run_experiment(cfg).summary.at("statistics");
  const double rate = stats.at("max_violation_rate").get<double>();
  const bool certs = stats.at("all_certificates_passed").get<bool>();
  std::string detail = fmt("max violation rate %.3f", rate) + (certs ? ", all certificates passed" : ", certificate failure");
  for (const json& g : stats.at("groups"))
    detail += ", " + g.at("phi").get<std::string>() + fmt(" mean L %.4f", g.at("mean_L").get<double>()) +
              fmt(" vs mean bound %.3f", g.at("mean_rhs").get<double>());
  return {rate <= 0.08 && certs, detail};
}

Outcome regularizer_check() {
  const auto k = KernelSpec::circle_fourier(1.0, 1.0, 1.0);
  const double M = k.sup_bound();
  const auto spec = analytic_spectrum(k);
  const auto dist = SyntheticDist::hard_gap(1, 0.2);
  std::vector<double> radii;
  for (int h = -4; h <= 18; ++h) radii.push_back(std::pow(2.0, h / 2.0) / M);
  const OracleReference ref = build_oracle_reference(dist, k, radii, 512, 99);
  CalibrationInputs in;
  in.spectrum = &spec;
  in.n = 512;
  in.M = M;
  const double Lambda = calibrate(in).Lambda;
  std::size_t compared = 0, bad = 0;
  for (std::size_t i = 0; i < ref.radii.size(); ++i) {
    const double x = 2.0 * M * ref.norms[i];
    if (x < 0.5) continue;
    ++compared;
    bad += ref.risks[i] + 2 * Lambda * Phi::linear()(x) > ref.risks[i] + 2 * Lambda * Phi::quadratic()(x);
  }
  ExperimentConfig cfg = config_for(ExperimentKind::rate_study);
  cfg.n_values = {64, 128, 256, 512};
  cfg.replicates = 4;
  cfg.n_ref = 512;
  const json stats = run_experiment(cfg).summary.at("statistics");
  std::string slopes;
  std::size_t emitted = 0;
  for (const json& g : stats) {
    const json& fit = g.at("L").at("fit");
    if (fit.is_null()) continue;
    ++emitted;
    slopes += ", " + g.at("phi").get<std::string>() + fmt(" L slope %.3f", fit.at("slope").get<double>());
  }
  return {compared > 0 && bad == 0 && emitted == 2,
          std::to_string(bad) + " of " + std::to_string(compared) + " grid functions favour quadratic" + slopes};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism_check() {
  const auto base = std::filesystem::temp_directory_path() / "svmsel_acceptance_determinism";
  std::filesystem::remove_all(base);
  std::size_t mismatches = 0, checked = 0;
  for (ExperimentKind kind : {ExperimentKind::train, ExperimentKind::select, ExperimentKind::verify_oracle,
                              ExperimentKind::spectrum, ExperimentKind::rademacher_check, ExperimentKind::risk}) {
    ExperimentConfig cfg = config_for(kind);
    cfg.n_values = kind == ExperimentKind::rademacher_check ? std::vector<std::size_t>{5, 8} : std::vector<std::size_t>{96};
    cfg.replicates = 3;
    cfg.n_ref = 256;
    cfg.mc_draws = 20000;
    std::string first;
    for (std::size_t workers : {1, 1, 3}) {
      cfg.workers = workers;
      const auto dir = base / (std::string(kind_name(kind)) + std::to_string(checked++));
      write_report(run_experiment(cfg), dir);
      const std::string rows = slurp(dir / "rows.csv");
      if (first.empty()) first = rows;
      mismatches += rows != first;
    }
  }
  std::filesystem::remove_all(base);
  return {mismatches == 0, std::to_string(checked) + " runs over 6 experiments, " + std::to_string(mismatches) +
                               " differing rows.csv"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"spectrum correctness", spectrum_check},
      {"gamma rate", gamma_check},
      {"sub-root solver", subroot_check},
      {"localized Rademacher domination", rademacher_check},
      {"loss relation", loss_check},
      {"solver cross-validation", solver_check},
      {"empirical oracle inequality", oracle_check},
      {"regularizer comparison", regularizer_check},
      {"determinism", determinism_check},
  };
  // optional: run a subset, e.g. `svmsel_acceptance 3 5`
  std::vector<bool> wanted(criteria.size(), argc == 1);
  for (int i = 1; i < argc; ++i) {
    const int c = std::atoi(argv[i]);
    if (c >= 1 && c <= static_cast<int>(criteria.size())) wanted[static_cast<std::size_t>(c - 1)] = true;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!wanted[i]) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %zu: %s: %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                out.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !out.pass;
  }
  return failed == 0 ? 0 : 1;
}
