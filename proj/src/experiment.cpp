#include "svmsel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "svmsel/complexity.hpp"
#include "svmsel/error.hpp"
#include "svmsel/losses.hpp"
#include "svmsel/rng.hpp"
#include "svmsel/selection.hpp"
#include "svmsel/solver.hpp"
#include "svmsel/spectrum.hpp"

namespace svmsel {
namespace {

constexpr const char* kModule = "expcli";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using nlohmann::json;

// Runs fn(0..count-1) on a pool; results keep index order. The error of the lowest failing
// index is rethrown with its job description.
std::vector<Table> run_jobs(std::size_t count, std::size_t workers, const std::function<Table(std::size_t)>& fn,
                            const std::function<std::string(std::size_t)>& describe) {
  std::vector<Table> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(workers, count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error(e.code(), e.module(), std::string(e.what()) + " [" + describe(i) + "]");
    } catch (const std::exception& e) {
      throw Error(ErrorCode::invalid_argument, kModule, std::string(e.what()) + " [" + describe(i) + "]");
    }
  }
  return out;
}

Table concat(Table header_only, const std::vector<Table>& parts) {
  for (const Table& part : parts) header_only.append(part);
  return header_only;
}

// Spectrum used by setting s1: analytic for circle kernels, otherwise the Gram spectrum on a
// midpoint grid of [0, 1) (the uniform marginal's Nystrom estimate).
SpectrumModel calibration_spectrum(const KernelSpec& kernel) {
  if (kernel.is_circle()) return analytic_spectrum(kernel);
  constexpr std::size_t grid = 512;
  std::vector<double> xs(grid);
  for (std::size_t i = 0; i < grid; ++i) xs[i] = (static_cast<double>(i) + 0.5) / grid;
  return empirical_spectrum(svmsel::gram(kernel, xs), grid);
}

class Calibrator {
 public:
  explicit Calibrator(const ExperimentConfig& cfg) : cfg_(cfg) {
    if (cfg.setting == Setting::s1)
      for (const auto& k : cfg.kernels) spectra_.push_back(calibration_spectrum(k.spec));
  }

  PenaltyCalibration operator()(std::size_t kernel, std::size_t n, const std::string& phi, double delta) const {
    CalibrationInputs in;
    in.setting = cfg_.setting;
    in.spectrum = cfg_.setting == Setting::s1 ? &spectra_[kernel] : nullptr;
    in.entropy = &cfg_.entropy;
    in.n = static_cast<double>(n);
    in.delta = delta;
    in.eta0 = cfg_.eta0_value();
    in.eta1 = cfg_.eta1_value();
    in.M = cfg_.kernels[kernel].spec.sup_bound();
    in.c = cfg_.c;
    in.K = cfg_.K;
    in.phi = Phi::from_name(phi);
    in.w1_not_inverted = cfg_.additive_w1;
    return calibrate(in);
  }

  PenaltyCalibration operator()(std::size_t kernel, std::size_t n, const std::string& phi) const {
    return (*this)(kernel, n, phi, cfg_.delta);
  }

  const SpectrumModel& spectrum(std::size_t kernel) const { return spectra_.at(kernel); }

 private:
  const ExperimentConfig& cfg_;
  std::vector<SpectrumModel> spectra_;
};

// Replicate r at sample size n: the replicate seed is split(master, r); the sample stream
// for n is split(replicate seed, n).
struct Job {
  std::size_t n = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::uint64_t sample_seed = 0;
};

std::vector<Job> replicate_jobs(const ExperimentConfig& cfg) {
  std::vector<Job> jobs;
  for (std::size_t n : cfg.n_values) {
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
      const std::uint64_t seed = split_seed(cfg.seed, r);
      jobs.push_back({n, r, seed, split_seed(seed, n)});
    }
  }
  return jobs;
}

std::string describe_job(const ExperimentConfig& cfg, const Job& job) {
  return std::string("experiment=") + kind_name(cfg.kind) + " n=" + std::to_string(job.n) +
         " replicate=" + std::to_string(job.replicate) + " seed=" + std::to_string(job.seed);
}

std::size_t distinct_count(const std::vector<std::size_t>& values) {
  return std::set<std::size_t>(values.begin(), values.end()).size();
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// ---- experiments ----

ExperimentReport run_spectrum(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  const auto jobs = replicate_jobs(cfg);
  const std::size_t top = cfg.spectrum_top;
  std::vector<SpectrumModel> analytic;
  for (const auto& k : cfg.kernels) analytic.push_back(calibration_spectrum(k.spec));
  const Table header({"kernel", "n", "replicate", "seed", "index", "reference", "empirical", "rel_error"});
  auto parts = run_jobs(
      jobs.size(), cfg.workers,
      [&](std::size_t i) {
        const Job& job = jobs[i];
        Table t = header;
        const Sample sample = draw_sample(cfg.dist, job.n, job.sample_seed);
        for (std::size_t k = 0; k < cfg.kernels.size(); ++k) {
          const SpectrumModel emp = empirical_spectrum(gram(cfg.kernels[k].spec, sample.x), job.n);
          for (std::size_t j = 1; j <= top; ++j) {
            const double ref = analytic[k].eigenvalue(j);
            const double val = emp.eigenvalue(j);
            const double rel = ref > 0.0 ? std::abs(val - ref) / ref : kNaN;
            t.add_row(RowBuilder()
                          .add(cfg.kernels[k].name)
                          .add(job.n)
                          .add(job.replicate)
                          .add(static_cast<unsigned long long>(job.seed))
                          .add(j)
                          .add(ref)
                          .add(val)
                          .add(rel)
                          .take());
          }
        }
        return t;
      },
      [&](std::size_t i) { return describe_job(cfg, jobs[i]); });
  rep.rows = concat(header, parts);
  for (std::size_t k = 0; k < cfg.kernels.size(); ++k) {
    Table spec({"index", "eigenvalue"});
    const std::size_t rows = std::min<std::size_t>(analytic[k].prefix_size(), std::max<std::size_t>(top, 100));
    for (std::size_t j = 1; j <= rows; ++j) spec.add_row(RowBuilder().add(j).add(analytic[k].eigenvalue(j)).take());
    rep.extra.emplace_back("spectrum_" + cfg.kernels[k].name + ".csv", std::move(spec));
  }
  return rep;
}

ExperimentReport run_gamma(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.rows = Table({"kernel", "n", "eta1", "M", "gamma_s1", "d_star", "gamma_s2", "x_star"});
  for (std::size_t k = 0; k < cfg.kernels.size(); ++k) {
    const SpectrumModel spec = calibration_spectrum(cfg.kernels[k].spec);
    const double M = cfg.kernels[k].spec.sup_bound();
    const double eta1 = cfg.eta1_value();
    for (std::size_t n : cfg.n_values) {
      const double dn = static_cast<double>(n);
      const GammaS1 g1 = gamma_s1_detail(spec, dn, eta1, M);
      rep.rows.add_row(RowBuilder()
                           .add(cfg.kernels[k].name)
                           .add(n)
                           .add(eta1)
                           .add(M)
                           .add(g1.value)
                           .add(g1.argmin)
                           .add(gamma_s2(cfg.entropy, dn, M))
                           .add(x_star(cfg.entropy, dn, M))
                           .take());
    }
  }
  return rep;
}

ExperimentReport run_calibrate(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  const Calibrator calib(cfg);
  rep.rows = Table({"kernel", "n", "phi", "setting", "delta", "Lambda", "gamma", "w1", "x_R", "R", "pen", "rho", "b_R",
                    "C_R", "r_star_bound", "r_star_exact", "sufficient"});
  for (std::size_t k = 0; k < cfg.kernels.size(); ++k) {
    for (std::size_t n : cfg.n_values) {
      for (const auto& phi : cfg.phis) {
        const PenaltyCalibration cal = calib(k, n, phi);
        for (const PenaltyRow& row : cal.rows) {
          const double exact = cfg.setting == Setting::s1
                                   ? r_star_exact_s1(row.params.C_R, calib.spectrum(k), row.R, static_cast<double>(n))
                                   : kNaN;
          rep.rows.add_row(RowBuilder()
                               .add(cfg.kernels[k].name)
                               .add(n)
                               .add(phi)
                               .add(setting_name(cfg.setting))
                               .add(cal.delta)
                               .add(cal.Lambda)
                               .add(cal.gamma)
                               .add(cal.w1)
                               .add(cal.x_R)
                               .add(row.R)
                               .add(row.pen)
                               .add(row.rho)
                               .add(row.params.b_R)
                               .add(row.params.C_R)
                               .add(row.params.r_star)
                               .add(exact)
                               .add(row.sufficient)
                               .take());
        }
      }
    }
  }
  return rep;
}

// Shared by train, rate-study and risk: fits every (kernel, phi) on one sample.
struct FitRecord {
  std::size_t kernel = 0;
  std::string phi;
  double Lambda = 0.0;
  FitResult fit;
  RiskReport risk;
};

std::vector<FitRecord> fit_all(const ExperimentConfig& cfg, const Calibrator& calib, const Sample& sample) {
  std::vector<FitRecord> out;
  for (std::size_t k = 0; k < cfg.kernels.size(); ++k) {
    const ConstrainedSolver solver(sample, cfg.kernels[k].spec);
    for (const auto& phi : cfg.phis) {
      const PenaltyCalibration cal = calib(k, sample.size(), phi);
      TrainConfig tc;
      tc.phi = cal.phi;
      tc.Lambda = cal.Lambda;
      FitResult fit = train_regularized(solver, tc);
      RiskReport risk = relative_risks(fit.g_hat, cfg.dist);
      out.push_back({k, phi, cal.Lambda, std::move(fit), risk});
    }
  }
  return out;
}

ExperimentReport run_train(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  const Calibrator calib(cfg);
  const auto jobs = replicate_jobs(cfg);
  const Table header({"replicate", "seed", "n", "kernel", "phi", "Lambda", "R_opt", "norm", "emp_hinge", "objective",
                      "L", "Theta", "path_events", "grid_fallback", "solver_fallback"});
  auto parts = run_jobs(
      jobs.size(), cfg.workers,
      [&](std::size_t i) {
        const Job& job = jobs[i];
        Table t = header;
        for (const FitRecord& rec : fit_all(cfg, calib, draw_sample(cfg.dist, job.n, job.sample_seed))) {
          t.add_row(RowBuilder()
                        .add(job.replicate)
                        .add(static_cast<unsigned long long>(job.seed))
                        .add(job.n)
                        .add(cfg.kernels[rec.kernel].name)
                        .add(rec.phi)
                        .add(rec.Lambda)
                        .add(rec.fit.R_opt)
                        .add(rec.fit.R_hat_continuous)
                        .add(rec.fit.emp_hinge)
                        .add(rec.fit.objective)
                        .add(rec.risk.rel_hinge)
                        .add(rec.risk.rel_01)
                        .add(rec.fit.path_events)
                        .add(rec.fit.grid_fallback)
                        .add(rec.fit.solver_fallback)
                        .take());
        }
        return t;
      },
      [&](std::size_t i) { return describe_job(cfg, jobs[i]); });
  rep.rows = concat(header, parts);
  return rep;
}

ExperimentReport run_select(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  const Calibrator calib(cfg);
  const auto jobs = replicate_jobs(cfg);
  const double t = static_cast<double>(cfg.kernels.size());
  std::vector<KernelSpec> kernels;
  for (const auto& k : cfg.kernels) kernels.push_back(k.spec);
  const Table header({"replicate", "seed", "n", "phi", "kernel", "kernel_index", "R_hat", "norm", "emp_hinge",
                      "penalized", "L", "Theta"});
  const Table models_header({"replicate", "n", "phi", "kernel", "R", "emp_hinge", "pen", "penalized", "rho", "chosen"});
  std::vector<Table> model_parts(jobs.size());
  auto parts = run_jobs(
      jobs.size(), cfg.workers,
      [&](std::size_t i) {
        const Job& job = jobs[i];
        Table out = header;
        Table models = models_header;
        const Sample sample = draw_sample(cfg.dist, job.n, job.sample_seed);
        for (const auto& phi : cfg.phis) {
          std::vector<PenaltyCalibration> cals;
          for (std::size_t k = 0; k < kernels.size(); ++k) cals.push_back(calib(k, job.n, phi, cfg.delta / t));
          TrainConfig tc;
          tc.phi = Phi::from_name(phi);
          const SelectionResult sel = select_model(sample, kernels, cals, tc);
          const RiskReport risk = relative_risks(sel.g_hat, cfg.dist);
          const SelectionRow* chosen = nullptr;
          for (const SelectionRow& row : sel.rows) {
            if (row.chosen) chosen = &row;
            models.add_row(RowBuilder()
                               .add(job.replicate)
                               .add(job.n)
                               .add(phi)
                               .add(cfg.kernels[row.kernel].name)
                               .add(row.R)
                               .add(row.emp_hinge)
                               .add(row.pen)
                               .add(row.penalized)
                               .add(row.rho)
                               .add(row.chosen)
                               .take());
          }
          out.add_row(RowBuilder()
                          .add(job.replicate)
                          .add(static_cast<unsigned long long>(job.seed))
                          .add(job.n)
                          .add(phi)
                          .add(cfg.kernels[sel.kernel_index].name)
                          .add(sel.kernel_index)
                          .add(sel.R_hat)
                          .add(sel.g_hat.rkhs_norm())
                          .add(chosen->emp_hinge)
                          .add(chosen->penalized)
                          .add(risk.rel_hinge)
                          .add(risk.rel_01)
                          .take());
        }
        model_parts[i] = std::move(models);
        return out;
      },
      [&](std::size_t i) { return describe_job(cfg, jobs[i]); });
  rep.rows = concat(header, parts);
  rep.extra.emplace_back("models.csv", concat(models_header, model_parts));
  return rep;
}

ExperimentReport run_verify_oracle(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  const Calibrator calib(cfg);
  const auto jobs = replicate_jobs(cfg);
  const std::size_t n_max = *std::max_element(cfg.n_values.begin(), cfg.n_values.end());

  // One reference per kernel; radii on a half-octave grid covering every selection grid.
  std::vector<OracleReference> refs;
  Table ref_table({"kernel", "n_ref", "R", "norm", "L"});
  for (std::size_t k = 0; k < cfg.kernels.size(); ++k) {
    const double M = cfg.kernels[k].spec.sup_bound();
    std::vector<double> radii;
    const int k_max = static_cast<int>(std::ceil(std::log2(static_cast<double>(n_max)) - 1e-12));
    for (int h = -4; h <= 2 * k_max; ++h) radii.push_back(std::exp2(0.5 * h) / M);
    refs.push_back(build_oracle_reference(cfg.dist, cfg.kernels[k].spec, radii, cfg.n_ref,
                                          split_seed(cfg.seed, 0xfeedULL + k)));
    for (std::size_t i = 0; i < refs.back().radii.size(); ++i)
      ref_table.add_row(RowBuilder()
                            .add(cfg.kernels[k].name)
                            .add(cfg.n_ref)
                            .add(refs.back().radii[i])
                            .add(refs.back().norms[i])
                            .add(refs.back().risks[i])
                            .take());
  }
  rep.extra.emplace_back("reference.csv", std::move(ref_table));

  const Table header({"replicate", "seed", "n", "kernel", "phi", "delta", "Lambda", "R_hat", "norm", "emp_hinge",
                      "objective", "L", "Theta", "rhs", "violated", "cert_lhs", "cert_rhs", "cert_passed"});
  auto parts = run_jobs(
      jobs.size(), cfg.workers,
      [&](std::size_t i) {
        const Job& job = jobs[i];
        Table t = header;
        const Sample sample = draw_sample(cfg.dist, job.n, job.sample_seed);
        for (std::size_t k = 0; k < cfg.kernels.size(); ++k) {
          const ConstrainedSolver solver(sample, cfg.kernels[k].spec);
          for (const auto& phi : cfg.phis) {
            const PenaltyCalibration cal = calib(k, job.n, phi);
            TrainConfig tc;
            tc.phi = cal.phi;
            tc.Lambda = cal.Lambda;
            const FitResult fit = train_regularized(solver, tc);
            const RiskReport risk = relative_risks(fit.g_hat, cfg.dist);
            const double rhs = oracle_rhs(refs[k], cal, cal.phi, cfg.trailing_c_w1);
            const Certificate cert = approx_minimizer_certificate(fit, solver, cal);
            t.add_row(RowBuilder()
                          .add(job.replicate)
                          .add(static_cast<unsigned long long>(job.seed))
                          .add(job.n)
                          .add(cfg.kernels[k].name)
                          .add(phi)
                          .add(cfg.delta)
                          .add(cal.Lambda)
                          .add(cert.R_hat)
                          .add(fit.R_hat_continuous)
                          .add(fit.emp_hinge)
                          .add(fit.objective)
                          .add(risk.rel_hinge)
                          .add(risk.rel_01)
                          .add(rhs)
                          .add(risk.rel_hinge > rhs)
                          .add(cert.lhs)
                          .add(cert.rhs)
                          .add(cert.passed)
                          .take());
          }
        }
        return t;
      },
      [&](std::size_t i) { return describe_job(cfg, jobs[i]); });
  rep.rows = concat(header, parts);
  return rep;
}

ExperimentReport run_rate_study(const ExperimentConfig& cfg) {
  if (distinct_count(cfg.n_values) < 4)
    fail(ErrorCode::config, kModule, "rate-study needs at least 4 distinct n values");
  ExperimentReport rep;
  const Calibrator calib(cfg);
  const auto jobs = replicate_jobs(cfg);
  const Table header({"replicate", "seed", "n", "kernel", "phi", "Lambda", "norm", "emp_hinge", "L", "Theta",
                      "gamma_s1", "gamma_s2"});
  std::vector<SpectrumModel> spectra;
  for (const auto& k : cfg.kernels) spectra.push_back(calibration_spectrum(k.spec));
  auto parts = run_jobs(
      jobs.size(), cfg.workers,
      [&](std::size_t i) {
        const Job& job = jobs[i];
        Table t = header;
        const double dn = static_cast<double>(job.n);
        for (const FitRecord& rec : fit_all(cfg, calib, draw_sample(cfg.dist, job.n, job.sample_seed))) {
          const double M = cfg.kernels[rec.kernel].spec.sup_bound();
          t.add_row(RowBuilder()
                        .add(job.replicate)
                        .add(static_cast<unsigned long long>(job.seed))
                        .add(job.n)
                        .add(cfg.kernels[rec.kernel].name)
                        .add(rec.phi)
                        .add(rec.Lambda)
                        .add(rec.fit.R_hat_continuous)
                        .add(rec.fit.emp_hinge)
                        .add(rec.risk.rel_hinge)
                        .add(rec.risk.rel_01)
                        .add(gamma_s1(spectra[rec.kernel], dn, cfg.eta1_value(), M))
                        .add(gamma_s2(cfg.entropy, dn, M))
                        .take());
        }
        return t;
      },
      [&](std::size_t i) { return describe_job(cfg, jobs[i]); });
  rep.rows = concat(header, parts);
  return rep;
}

ExperimentReport run_rademacher_check(const ExperimentConfig& cfg) {
  const RademacherConfig& rc = cfg.rademacher;
  require(rc.dims >= 1 && rc.dims <= 64, kModule, "rademacher.dims must lie in [1, 64]");
  for (std::size_t n : cfg.n_values)
    if (rc.sign_draws == 0 && n > 20) fail(ErrorCode::config, kModule, "exact enumeration needs n <= 20");
  for (const auto& k : cfg.kernels)
    if (!k.spec.is_circle()) fail(ErrorCode::config, kModule, "rademacher-check needs circle kernels");

  struct Cell {
    std::size_t kernel, n;
  };
  std::vector<Cell> cells;
  for (std::size_t k = 0; k < cfg.kernels.size(); ++k)
    for (std::size_t n : cfg.n_values) cells.push_back({k, n});

  const Table header({"kernel", "n", "R", "r", "dims", "x_draws", "estimate", "std_error", "bound_inf", "bound_sum",
                      "inf_ok", "sum_ok"});
  auto parts = run_jobs(
      cells.size(), cfg.workers,
      [&](std::size_t i) {
        const Cell cell = cells[i];
        const KernelSpec& kernel = cfg.kernels[cell.kernel].spec;
        const std::size_t nr = rc.radii.size() * rc.r_values.size();
        std::vector<std::vector<double>> values(nr);
        std::vector<double> lambda;
        for (std::size_t draw = 0; draw < rc.x_draws; ++draw) {
          const std::uint64_t seed = split_seed(split_seed(cfg.seed, draw), cell.n);
          const Sample sample = draw_sample(cfg.dist, cell.n, seed);
          const CircleFeatures feats = circle_features(kernel, sample.x, rc.dims);
          lambda = feats.lambda;
          std::size_t j = 0;
          for (double R : rc.radii) {
            for (double r : rc.r_values) {
              const double v = rc.sign_draws == 0
                                   ? rademacher_exact(feats, R, r)
                                   : rademacher_mc(feats, R, r, rc.sign_draws, split_seed(seed, j), false).mean;
              values[j++].push_back(v);
            }
          }
        }
        // bounds for the kernel truncated to the same features
        const SpectrumModel truncated = SpectrumModel::from_eigenvalues(lambda);
        Table t = header;
        std::size_t j = 0;
        const double dn = static_cast<double>(cell.n);
        for (double R : rc.radii) {
          for (double r : rc.r_values) {
            const double est = mean(values[j]);
            double var = 0.0;
            for (double v : values[j]) var += (v - est) * (v - est);
            const double se = values[j].size() > 1
                                  ? std::sqrt(var / static_cast<double>(values[j].size() - 1) /
                                              static_cast<double>(values[j].size()))
                                  : 0.0;
            const double b_inf = localized_bound_inf(truncated, R, r, dn);
            const double b_sum = localized_bound_sum(truncated, R, r, dn);
            t.add_row(RowBuilder()
                          .add(cfg.kernels[cell.kernel].name)
                          .add(cell.n)
                          .add(R)
                          .add(r)
                          .add(rc.dims)
                          .add(rc.x_draws)
                          .add(est)
                          .add(se)
                          .add(b_inf)
                          .add(b_sum)
                          .add(est <= b_inf * (1.0 + 1e-12))
                          .add(b_inf <= b_sum * (1.0 + 1e-12))
                          .take());
            ++j;
          }
        }
        return t;
      },
      [&](std::size_t i) {
        return std::string("experiment=rademacher-check kernel=") + cfg.kernels[cells[i].kernel].name +
               " n=" + std::to_string(cells[i].n);
      });
  ExperimentReport rep;
  rep.rows = concat(header, parts);
  return rep;
}

ExperimentReport run_risk(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  const Calibrator calib(cfg);
  const auto jobs = replicate_jobs(cfg);
  const Table header({"replicate", "seed", "n", "kernel", "phi", "norm", "L_quad", "Theta_quad", "quad_error", "L_mc",
                      "L_mc_se", "Theta_mc", "Theta_mc_se"});
  auto parts = run_jobs(
      jobs.size(), cfg.workers,
      [&](std::size_t i) {
        const Job& job = jobs[i];
        Table t = header;
        std::size_t idx = 0;
        for (const FitRecord& rec : fit_all(cfg, calib, draw_sample(cfg.dist, job.n, job.sample_seed))) {
          const RepresenterFn& g = rec.fit.g_hat;
          const RiskReport mc = relative_risks_mc([&g](double x) { return g(x); }, cfg.dist, cfg.mc_draws,
                                                  split_seed(job.sample_seed, 0x6d63ULL + idx++));
          t.add_row(RowBuilder()
                        .add(job.replicate)
                        .add(static_cast<unsigned long long>(job.seed))
                        .add(job.n)
                        .add(cfg.kernels[rec.kernel].name)
                        .add(rec.phi)
                        .add(rec.fit.R_hat_continuous)
                        .add(rec.risk.rel_hinge)
                        .add(rec.risk.rel_01)
                        .add(rec.risk.error_estimate)
                        .add(mc.rel_hinge)
                        .add(mc.hinge_std_error)
                        .add(mc.rel_01)
                        .add(mc.zero_one_std_error)
                        .take());
        }
        return t;
      },
      [&](std::size_t i) { return describe_job(cfg, jobs[i]); });
  rep.rows = concat(header, parts);
  return rep;
}

// ---- summaries (rows only) ----

// Groups row indices by the values of `keys`, in first-appearance order.
std::vector<std::pair<std::vector<std::string>, std::vector<std::size_t>>> group_rows(
    const Table& rows, const std::vector<std::string>& keys) {
  std::vector<std::pair<std::vector<std::string>, std::vector<std::size_t>>> groups;
  std::map<std::vector<std::string>, std::size_t> where;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::string> key;
    for (const auto& k : keys) key.push_back(rows.cell(i, k));
    auto [it, inserted] = where.emplace(key, groups.size());
    if (inserted) groups.push_back({key, {}});
    groups[it->second].second.push_back(i);
  }
  return groups;
}

json group_key(const std::vector<std::string>& names, const std::vector<std::string>& values) {
  json out;
  for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = values[i];
  return out;
}

std::vector<double> column_of(const Table& rows, const std::vector<std::size_t>& idx, std::string_view name) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(rows.number(i, name));
  return out;
}

// Fit of the per-n mean of `column` against n; null when fewer than 4 n values or a mean <= 0.
json mean_rate_fit(const Table& rows, const std::vector<std::size_t>& idx, std::string_view column) {
  std::map<double, std::vector<double>> by_n;
  for (std::size_t i : idx) by_n[rows.number(i, "n")].push_back(rows.number(i, column));
  std::vector<double> ns, vs;
  for (const auto& [n, v] : by_n) {
    ns.push_back(n);
    vs.push_back(mean(v));
  }
  json out;
  out["n"] = ns;
  out["mean"] = vs;
  const bool positive = std::all_of(vs.begin(), vs.end(), [](double v) { return v > 0.0 && std::isfinite(v); });
  out["fit"] = ns.size() >= 4 && positive ? to_json(rate_study_fit(ns, vs)) : json(nullptr);
  return out;
}

json summarize_spectrum(const Table& rows) {
  json out = json::array();
  for (const auto& [key, idx] : group_rows(rows, {"kernel", "n"})) {
    json g = group_key({"kernel", "n"}, key);
    json per_index = json::array();
    double worst = 0.0;
    for (const auto& [jkey, jidx] : group_rows(rows, {"index"})) {
      std::vector<std::size_t> both;
      std::set_intersection(idx.begin(), idx.end(), jidx.begin(), jidx.end(), std::back_inserter(both));
      if (both.empty()) continue;
      const double med = median(column_of(rows, both, "rel_error"));
      worst = std::max(worst, med);
      per_index.push_back({{"index", jkey[0]}, {"median_rel_error", med}});
    }
    g["per_index"] = per_index;
    g["max_median_rel_error"] = worst;
    out.push_back(g);
  }
  return out;
}

json summarize_gamma(const Table& rows) {
  json out = json::array();
  for (const auto& [key, idx] : group_rows(rows, {"kernel"})) {
    json g = group_key({"kernel"}, key);
    const auto ns = column_of(rows, idx, "n");
    g["gamma_s1"] = ns.size() >= 4 ? to_json(rate_study_fit(ns, column_of(rows, idx, "gamma_s1"))) : json(nullptr);
    g["gamma_s2"] = ns.size() >= 4 ? to_json(rate_study_fit(ns, column_of(rows, idx, "gamma_s2"))) : json(nullptr);
    out.push_back(g);
  }
  return out;
}

json summarize_calibrate(const Table& rows) {
  json out = json::array();
  for (const auto& [key, idx] : group_rows(rows, {"kernel", "n", "phi"})) {
    json g = group_key({"kernel", "n", "phi"}, key);
    g["Lambda"] = rows.number(idx.front(), "Lambda");
    g["radii"] = idx.size();
    double min_rho = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      min_rho = std::min(min_rho, rows.number(idx[j], "rho"));
      if (j && rows.number(idx[j], "pen") < rows.number(idx[j - 1], "pen")) monotone = false;
    }
    g["min_rho"] = min_rho;
    g["pen_monotone"] = monotone;
    out.push_back(g);
  }
  return out;
}

json summarize_fits(const Table& rows, const std::vector<std::string>& extra_cols) {
  json out = json::array();
  for (const auto& [key, idx] : group_rows(rows, {"kernel", "phi", "n"})) {
    json g = group_key({"kernel", "phi", "n"}, key);
    g["replicates"] = idx.size();
    for (const auto& col : extra_cols) g["mean_" + col] = mean(column_of(rows, idx, col));
    out.push_back(g);
  }
  return out;
}

json summarize_select(const Table& rows) {
  json out = json::array();
  for (const auto& [key, idx] : group_rows(rows, {"phi", "n"})) {
    json g = group_key({"phi", "n"}, key);
    std::map<std::string, std::size_t> counts;
    for (std::size_t i : idx) ++counts[rows.cell(i, "kernel")];
    json freq = json::object();
    for (const auto& [name, count] : counts) freq[name] = static_cast<double>(count) / static_cast<double>(idx.size());
    g["replicates"] = idx.size();
    g["selection_frequency"] = freq;
    g["mean_L"] = mean(column_of(rows, idx, "L"));
    out.push_back(g);
  }
  return out;
}

json summarize_verify(const Table& rows) {
  json groups = json::array();
  bool all_certified = true;
  double worst_rate = 0.0;
  for (const auto& [key, idx] : group_rows(rows, {"kernel", "phi", "n"})) {
    json g = group_key({"kernel", "phi", "n"}, key);
    std::size_t violations = 0, cert_failures = 0;
    for (std::size_t i : idx) {
      violations += rows.cell(i, "violated") == "1";
      cert_failures += rows.cell(i, "cert_passed") != "1";
    }
    const double rate = static_cast<double>(violations) / static_cast<double>(idx.size());
    const double delta = rows.number(idx.front(), "delta");
    g["replicates"] = idx.size();
    g["violations"] = violations;
    g["violation_rate"] = rate;
    g["allowed_rate"] = delta + 0.03;
    g["certificate_failures"] = cert_failures;
    g["mean_L"] = mean(column_of(rows, idx, "L"));
    g["mean_rhs"] = mean(column_of(rows, idx, "rhs"));
    all_certified = all_certified && cert_failures == 0;
    worst_rate = std::max(worst_rate, rate);
    groups.push_back(g);
  }
  return {{"groups", groups}, {"all_certificates_passed", all_certified}, {"max_violation_rate", worst_rate}};
}

json summarize_rate(const Table& rows) {
  json out = json::array();
  for (const auto& [key, idx] : group_rows(rows, {"kernel", "phi"})) {
    json g = group_key({"kernel", "phi"}, key);
    g["L"] = mean_rate_fit(rows, idx, "L");
    g["Theta"] = mean_rate_fit(rows, idx, "Theta");
    g["gamma_s1"] = mean_rate_fit(rows, idx, "gamma_s1");
    g["gamma_s2"] = mean_rate_fit(rows, idx, "gamma_s2");
    out.push_back(g);
  }
  return out;
}

json summarize_rademacher(const Table& rows) {
  std::size_t inf_viol = 0, sum_viol = 0;
  double max_ratio = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    inf_viol += rows.cell(i, "inf_ok") != "1";
    sum_viol += rows.cell(i, "sum_ok") != "1";
    const double b = rows.number(i, "bound_inf");
    if (b > 0.0) max_ratio = std::max(max_ratio, rows.number(i, "estimate") / b);
  }
  return {{"cells", rows.size()},
          {"inf_bound_violations", inf_viol},
          {"sum_bound_violations", sum_viol},
          {"max_estimate_over_inf_bound", max_ratio}};
}

json summarize_risk(const Table& rows) {
  double max_z = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double se = rows.number(i, "L_mc_se");
    if (se > 0.0) max_z = std::max(max_z, std::abs(rows.number(i, "L_mc") - rows.number(i, "L_quad")) / se);
  }
  return {{"rows", rows.size()}, {"max_abs_z_hinge", max_z}};
}

}  // namespace

RateFit rate_study_fit(std::span<const double> n, std::span<const double> values) {
  require(n.size() == values.size(), kModule, "rate fit needs matching n and value lists");
  if (n.size() < 4) fail(ErrorCode::invalid_argument, kModule, "rate fit needs at least 4 points");
  std::set<double> distinct(n.begin(), n.end());
  if (distinct.size() < 4) fail(ErrorCode::invalid_argument, kModule, "rate fit needs at least 4 distinct n values");
  const std::size_t m = n.size();
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(n[i] > 0.0) || !(values[i] > 0.0))
      fail(ErrorCode::domain, kModule, "rate fit needs positive n and values");
    lx[i] = std::log(n[i]);
    ly[i] = std::log(values[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(m);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  RateFit fit;
  fit.points = m;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = ly[i] - fit.intercept - fit.slope * lx[i];
    sse += e * e;
  }
  const double dof = static_cast<double>(m - 2);
  fit.std_error = std::sqrt(sse / dof / sxx);
  const double q = boost::math::quantile(boost::math::students_t(dof), 0.975);
  fit.lower = fit.slope - q * fit.std_error;
  fit.upper = fit.slope + q * fit.std_error;
  return fit;
}

json to_json(const RateFit& fit) {
  return {{"slope", fit.slope},         {"intercept", fit.intercept}, {"std_error", fit.std_error},
          {"slope_lower", fit.lower},   {"slope_upper", fit.upper},   {"points", fit.points}};
}

json summarize(ExperimentKind kind, const Table& rows) {
  switch (kind) {
    case ExperimentKind::spectrum: return summarize_spectrum(rows);
    case ExperimentKind::gamma: return summarize_gamma(rows);
    case ExperimentKind::calibrate: return summarize_calibrate(rows);
    case ExperimentKind::train: return summarize_fits(rows, {"L", "Theta", "norm", "objective"});
    case ExperimentKind::select: return summarize_select(rows);
    case ExperimentKind::verify_oracle: return summarize_verify(rows);
    case ExperimentKind::rate_study: return summarize_rate(rows);
    case ExperimentKind::rademacher_check: return summarize_rademacher(rows);
    case ExperimentKind::risk: return summarize_risk(rows);
  }
  return nullptr;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  require(!cfg.kernels.empty(), kModule, "config has no kernels");
  require(!cfg.n_values.empty(), kModule, "config has no n values");
  require(cfg.replicates >= 1 && cfg.workers >= 1, kModule, "replicates and workers must be >= 1");
  ExperimentReport rep = [&] {
    switch (cfg.kind) {
      case ExperimentKind::spectrum: return run_spectrum(cfg);
      case ExperimentKind::gamma: return run_gamma(cfg);
      case ExperimentKind::calibrate: return run_calibrate(cfg);
      case ExperimentKind::train: return run_train(cfg);
      case ExperimentKind::select: return run_select(cfg);
      case ExperimentKind::verify_oracle: return run_verify_oracle(cfg);
      case ExperimentKind::rate_study: return run_rate_study(cfg);
      case ExperimentKind::rademacher_check: return run_rademacher_check(cfg);
      case ExperimentKind::risk: return run_risk(cfg);
    }
    fail(ErrorCode::config, kModule, "unknown experiment kind");
  }();
  rep.kind = cfg.kind;
  json echoed = config_to_json(cfg);
  echoed.erase("workers");  // results do not depend on it
  echoed.erase("output");
  rep.summary = {{"experiment", kind_name(cfg.kind)}, {"config", echoed}, {"statistics", summarize(cfg.kind, rep.rows)}};
  return rep;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  write_text_file(dir / "rows.csv", report.rows.to_csv());
  write_text_file(dir / "summary.json", dump_json(report.summary));
  for (const auto& [name, table] : report.extra) write_text_file(dir / name, table.to_csv());
}

}  // namespace svmsel
