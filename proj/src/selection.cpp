#include "svmsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "svmsel/error.hpp"

namespace svmsel {
namespace {

constexpr const char* kModule = "selection";

}  // namespace

double PenaltyCalibration::additive() const { return w1_not_inverted ? w1 / eta0 : 1.0 / (w1 * eta0); }

double PenaltyCalibration::pen(double R) const { return Lambda * (phi(M * R / 2.0) + additive()); }

double PenaltyCalibration::rho(double R) const {
  return Lambda * (phi(M * R) + phi(1.0) + additive()) - pen(R);
}

std::vector<double> PenaltyCalibration::radii() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.R);
  return out;
}

PenaltyCalibration calibrate(const CalibrationInputs& in) {
  require(in.delta > 0.0 && in.delta < 1.0, kModule, "delta must lie in (0, 1)");
  require(in.n >= 2.0 && std::floor(in.n) == in.n, kModule, "n must be an integer >= 2");
  require(in.eta0 > 0.0 && in.eta0 <= 0.5, kModule, "eta0 must lie in (0, 1/2]");
  require(in.M > 0.0, kModule, "sup bound M must be positive");
  require(in.c > 0.0, kModule, "constant c must be positive");
  require(in.K > 1.0, kModule, "contrast constant K must exceed 1");
  in.phi.validate();

  PenaltyCalibration cal;
  cal.setting = in.setting;
  cal.delta = in.delta;
  cal.c = in.c;
  cal.K = in.K;
  cal.eta0 = in.eta0;
  cal.eta1 = in.eta1;
  cal.M = in.M;
  cal.n = static_cast<std::size_t>(in.n);
  cal.phi = in.phi;
  cal.w1_not_inverted = in.w1_not_inverted;

  if (in.setting == Setting::s1) {
    require(in.spectrum != nullptr, kModule, "setting s1 needs a spectrum");
    require(in.eta1 > 0.0 && in.eta1 <= 0.5, kModule, "eta1 must lie in (0, 1/2]");
    cal.w1 = in.eta1;
    cal.gamma = gamma_s1(*in.spectrum, in.n, in.eta1, in.M);
  } else {
    require(in.entropy != nullptr, kModule, "setting s2 needs an entropy model");
    cal.w1 = 1.0;
    cal.gamma = gamma_s2(*in.entropy, in.n, in.M);
  }
  const double log_term = std::max(std::log(std::log(in.n) / in.delta), 1.0);
  cal.Lambda = in.c * (cal.gamma + log_term / (cal.w1 * in.n));

  const double log2n = std::log2(in.n);
  const int k_max = static_cast<int>(std::ceil(log2n - 1e-12));
  cal.x_R = std::log(log2n + 2.0);
  const double conf = cal.x_R + std::log(1.0 / in.delta) + std::log(2.0);
  for (int k = 0; k <= k_max; ++k) {
    PenaltyRow row;
    row.R = std::ldexp(1.0, k) / in.M;
    row.params = model_params(in.setting, row.R, in.M, in.eta0, in.eta1);
    row.params.r_star = in.setting == Setting::s1
                            ? r_star_bound_s1(row.params.C_R, *in.spectrum, in.n, in.eta1, in.M)
                            : r_star_bound_s2(row.params.C_R, *in.entropy, in.n, in.M);
    row.pen = cal.pen(row.R);
    row.rho = cal.rho(row.R);
    const double B = 75.0 * in.K * row.params.C_R + 28.0 * row.params.b_R;
    row.sufficient = 250.0 * in.K * row.params.r_star / row.params.C_R + B * conf / (3.0 * in.n);
    cal.rows.push_back(row);
  }
  return cal;
}

SelectionResult select_model(const Sample& sample, const std::vector<KernelSpec>& kernels,
                             const std::vector<PenaltyCalibration>& calibrations, const TrainConfig& cfg) {
  if (kernels.empty()) fail(ErrorCode::invalid_argument, kModule, "kernel list is empty");
  require(kernels.size() == calibrations.size(), kModule, "one calibration per kernel is required");

  SelectionResult out{0, 0.0, RepresenterFn::zero(kernels.front()), {}};
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_row = 0;
  std::vector<ConstrainedSolver> solvers;
  solvers.reserve(kernels.size());
  for (std::size_t t = 0; t < kernels.size(); ++t) {
    solvers.emplace_back(sample, kernels[t], cfg.max_iters);
    const PenaltyCalibration& cal = calibrations[t];
    for (const PenaltyRow& pr : cal.rows) {
      SelectionRow row;
      row.kernel = t;
      row.R = pr.R;
      const ConstrainedSolver& solver = solvers.back();
      if (pr.R <= solver.path().reachable_norm()) {
        const HingePath::Point pt = solver.path().at_radius(pr.R);
        row.emp_hinge = pt.emp_hinge;
        row.norm = pt.norm;
      } else {
        const ConstrainedFit fit = solver.solve(pr.R);
        row.emp_hinge = fit.emp_hinge;
        row.norm = fit.norm;
      }
      row.pen = pr.pen;
      row.rho = pr.rho;
      row.penalized = row.emp_hinge + row.pen;
      out.rows.push_back(row);
    }
  }
  // rows are ordered by kernel then R; select by (value, R, kernel)
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const SelectionRow& row = out.rows[i];
    if (i == 0) {
      best = row.penalized;
      continue;
    }
    const double slack = 1e-12 * std::max(1.0, std::abs(best));
    const bool better = row.penalized < best - slack;
    const bool tie = !better && row.penalized <= best + slack;
    if (better || (tie && row.R < out.rows[best_row].R)) {
      best = std::min(best, row.penalized);
      best_row = i;
    }
  }
  out.rows[best_row].chosen = true;
  out.kernel_index = out.rows[best_row].kernel;
  out.R_hat = out.rows[best_row].R;
  out.g_hat = solvers[out.kernel_index].solve(out.R_hat).f;
  return out;
}

Certificate approx_minimizer_certificate(const FitResult& fit, const ConstrainedSolver& solver,
                                         const PenaltyCalibration& cal, double tol) {
  Certificate cert;
  const double scaled = cal.M * fit.R_hat_continuous;
  const double k_hat = scaled > 1.0 ? std::ceil(std::log2(scaled) - 1e-12) : 0.0;
  cert.R_hat = std::ldexp(1.0, static_cast<int>(k_hat)) / cal.M;
  cert.lhs = fit.emp_hinge + cal.pen(cert.R_hat);
  cert.rhs = std::numeric_limits<double>::infinity();
  for (const PenaltyRow& row : cal.rows) cert.rhs = std::min(cert.rhs, solver.inner(row.R) + row.pen + row.rho);
  cert.passed = cert.lhs <= cert.rhs + tol * std::max(1.0, std::abs(cert.rhs));
  return cert;
}

OracleReference build_oracle_reference(const SyntheticDist& dist, const KernelSpec& kernel,
                                       const std::vector<double>& radii, std::size_t n_ref, std::uint64_t seed) {
  require(n_ref >= 2, kModule, "reference sample needs n_ref >= 2");
  const Sample sample = draw_sample(dist, n_ref, seed);
  const ConstrainedSolver solver(sample, kernel);
  OracleReference ref;
  ref.n_ref = n_ref;
  ref.radii.push_back(0.0);
  ref.norms.push_back(0.0);
  ref.risks.push_back(relative_risks([](double) { return 0.0; }, dist).rel_hinge);
  for (double R : radii) {
    const ConstrainedFit fit = solver.solve(R);
    ref.radii.push_back(R);
    ref.norms.push_back(fit.norm);
    ref.risks.push_back(relative_risks(fit.f, dist).rel_hinge);
  }
  return ref;
}

double oracle_rhs(const OracleReference& ref, const PenaltyCalibration& cal, const Phi& phi, bool trailing_c_w1) {
  require(!ref.risks.empty(), kModule, "oracle reference is empty");
  double inf_term = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ref.risks.size(); ++i) {
    inf_term = std::min(inf_term, ref.risks[i] + 2.0 * cal.Lambda * phi(2.0 * cal.M * ref.norms[i]));
  }
  const double trailing = trailing_c_w1 ? cal.c * cal.w1 / cal.eta0 : 1.0 / (cal.w1 * cal.eta0);
  return 2.0 * inf_term + 4.0 * cal.Lambda * (2.0 * phi(2.0) + trailing);
}

}  // namespace svmsel
