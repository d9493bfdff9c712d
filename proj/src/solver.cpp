#include "svmsel/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "svmsel/error.hpp"

namespace svmsel {
namespace {

constexpr const char* kModule = "solver";

HingePath::Point point_from_dual(const Eigen::MatrixXd& Q, const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
                                 double u) {
  HingePath::Point pt;
  pt.u = u;
  pt.coeffs = theta.cwiseProduct(y) / u;
  const Eigen::VectorXd q_theta = Q * theta;
  pt.norm = std::sqrt(std::max(0.0, theta.dot(q_theta))) / u;
  double total = 0.0;
  for (Eigen::Index i = 0; i < q_theta.size(); ++i) total += std::max(0.0, 1.0 - q_theta[i] / u);
  pt.emp_hinge = total / static_cast<double>(q_theta.size());
  return pt;
}

Eigen::VectorXd label_vector(const Sample& sample) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(sample.size()));
  for (std::size_t i = 0; i < sample.size(); ++i) y[static_cast<Eigen::Index>(i)] = sample.y[i];
  return y;
}

RepresenterFn to_representer(const KernelSpec& kernel, const Sample& sample, const Eigen::VectorXd& coeffs) {
  return RepresenterFn(kernel, sample.x, std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size()));
}

}  // namespace

Phi Phi::linear() {
  return Phi(Kind::linear, "linear", [](double x) { return x; });
}

Phi Phi::quadratic() {
  return Phi(Kind::quadratic, "quadratic", [](double x) { return 2.0 * x * x; });
}

Phi Phi::custom(std::string name, std::function<double(double)> fn) {
  require(static_cast<bool>(fn), kModule, "custom regularizer must be callable");
  Phi phi(Kind::custom, std::move(name), std::move(fn));
  phi.validate();
  return phi;
}

Phi Phi::from_name(const std::string& name) {
  if (name == "linear") return linear();
  if (name == "quadratic") return quadratic();
  fail(ErrorCode::invalid_argument, kModule, "unknown regularizer '" + name + "' (expected linear or quadratic)");
}

void Phi::validate() const {
  if (std::abs(fn_(0.0)) > 1e-12) fail(ErrorCode::invalid_argument, kModule, "phi(0) must be 0 for " + name_);
  double prev = fn_(0.0);
  for (int k = 1; k <= 400; ++k) {
    const double x = 1e-3 * std::pow(1e5, k / 400.0);
    const double v = fn_(x);
    if (!(v >= prev - 1e-12 * std::max(1.0, std::abs(prev))))
      fail(ErrorCode::invalid_argument, kModule, "phi must be nondecreasing: " + name_);
    if (x >= 0.5 && v < x - 1e-12 * x)
      fail(ErrorCode::invalid_argument, kModule, "phi(x) >= x must hold for x >= 1/2: " + name_);
    prev = v;
  }
}

double dual_coordinate_ascent(const Eigen::MatrixXd& Q, double u, Eigen::VectorXd& theta, double gap_tol,
                              std::size_t max_epochs, std::size_t* epochs) {
  const Eigen::Index n = Q.rows();
  require(u > 0.0, kModule, "u must be positive");
  require(theta.size() == n, kModule, "dual vector has the wrong size");
  Eigen::VectorXd w = Q * theta;
  double gap = std::numeric_limits<double>::infinity();
  std::size_t epoch = 0;
  while (epoch < max_epochs) {
    ++epoch;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double qii = Q(i, i);
      const double next = qii > 0.0 ? std::clamp(theta[i] + (u - w[i]) / qii, 0.0, 1.0) : (w[i] < u ? 1.0 : theta[i]);
      const double step = next - theta[i];
      if (step != 0.0) {
        theta[i] = next;
        w.noalias() += step * Q.col(i);
      }
    }
    if (epoch % 64 == 0) w.noalias() = Q * theta;
    double slack = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) slack += std::max(0.0, 1.0 - w[i] / u);
    const double primal = slack + theta.dot(w) / (2.0 * u);
    const double dual = theta.sum() - theta.dot(w) / (2.0 * u);
    gap = primal - dual;
    if (gap <= gap_tol) break;
  }
  if (epochs != nullptr) *epochs = epoch;
  return gap;
}

DualResult dual_svm0_crosscheck(const Sample& sample, const KernelSpec& kernel, double Lambda, double gap_tol) {
  require(sample.size() >= 1, kModule, "sample must be nonempty");
  require(Lambda > 0.0 && std::isfinite(Lambda), kModule, "Lambda must be positive");
  const Eigen::MatrixXd K = gram(kernel, sample.x);
  const Eigen::VectorXd y = label_vector(sample);
  const Eigen::MatrixXd Q = y.asDiagonal() * K * y.asDiagonal();
  const double n = static_cast<double>(sample.size());
  const double M = kernel.sup_bound();
  // n * (hinge mean + 2 Lambda M^2 |f|^2) = sum hinge + (u / 2) |f|^2
  const double u = 4.0 * Lambda * M * M * n;

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(Q.rows());
  DualResult out;
  const double gap = dual_coordinate_ascent(Q, u, theta, gap_tol * n, 10'000'000, &out.epochs);
  const Eigen::VectorXd w = Q * theta;
  double slack = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) slack += std::max(0.0, 1.0 - w[i] / u);
  out.objective = (slack + theta.dot(w) / (2.0 * u)) / n;
  out.dual = (theta.sum() - theta.dot(w) / (2.0 * u)) / n;
  out.gap = gap / n;
  out.coeffs = theta.cwiseProduct(y) / u;
  return out;
}

ConstrainedSolver::ConstrainedSolver(const Sample& sample, const KernelSpec& kernel, std::size_t max_events)
    : sample_(sample), kernel_(kernel), path_(gram(kernel, sample.x), sample.y, max_events) {
  require(sample.size() >= 1, kModule, "sample must be nonempty");
}

HingePath::Point ConstrainedSolver::fallback_point(double R, bool& exhausted) const {
  const Eigen::MatrixXd& Q = path_.q_matrix();
  const Eigen::VectorXd y = label_vector(sample_);
  const Eigen::Index n = Q.rows();
  const double gap_tol = 1e-11 * static_cast<double>(n);
  constexpr std::size_t kEpochs = 200000;
  exhausted = false;

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  auto solve_at = [&](double u) {
    const double gap = dual_coordinate_ascent(Q, u, theta, gap_tol, kEpochs);
    if (gap > gap_tol) exhausted = true;
    return point_from_dual(Q, y, theta, u);
  };

  // |f_u| is nonincreasing in u
  double u_hi = std::max(Q.diagonal().maxCoeff(), 1e-300) * static_cast<double>(n) / std::max(R, 1e-300);
  HingePath::Point hi = solve_at(u_hi);
  while (hi.norm > R) {
    u_hi *= 4.0;
    hi = solve_at(u_hi);
  }
  double u_lo = u_hi;
  HingePath::Point lo = hi;
  const double u_floor = u_hi * 1e-14;
  while (lo.norm < R && u_lo > u_floor) {
    u_hi = u_lo;
    hi = lo;
    u_lo *= 0.25;
    lo = solve_at(u_lo);
  }
  if (lo.norm <= R) return lo;
  for (int it = 0; it < 80 && u_hi / u_lo > 1.0 + 1e-13; ++it) {
    const double mid = std::sqrt(u_lo * u_hi);
    HingePath::Point pt = solve_at(mid);
    if (pt.norm > R) {
      u_lo = mid;
    } else {
      u_hi = mid;
      hi = std::move(pt);
    }
  }
  return hi;
}

ConstrainedFit ConstrainedSolver::solve(double R) const {
  require(R >= 0.0 && std::isfinite(R), kModule, "radius must be nonnegative and finite");
  ConstrainedFit fit{RepresenterFn::zero(kernel_)};
  HingePath::Point pt;
  if (R <= path_.reachable_norm() || path_.ridge_limited()) {
    pt = path_.at_radius(std::min(R, path_.reachable_norm()));
  } else {
    fit.fallback = true;
    pt = fallback_point(R, fit.budget_exhausted);
  }
  fit.iterations = path_.events();
  fit.emp_hinge = pt.emp_hinge;
  fit.norm = pt.norm;
  if (R == 0.0) {
    fit.emp_hinge = 1.0;
    fit.norm = 0.0;
    return fit;
  }
  fit.f = to_representer(kernel_, sample_, pt.coeffs);
  return fit;
}

double ConstrainedSolver::inner(double R) const {
  if (R <= path_.reachable_norm() || path_.ridge_limited())
    return path_.at_radius(std::min(R, path_.reachable_norm())).emp_hinge;
  bool exhausted = false;
  return fallback_point(R, exhausted).emp_hinge;
}

ConstrainedFit train_constrained(const Sample& sample, const KernelSpec& kernel, double R, const TrainConfig& cfg) {
  return ConstrainedSolver(sample, kernel, cfg.max_iters).solve(R);
}

FitResult train_regularized(const Sample& sample, const KernelSpec& kernel, const TrainConfig& cfg) {
  return train_regularized(ConstrainedSolver(sample, kernel, cfg.max_iters), cfg);
}

FitResult train_regularized(const ConstrainedSolver& solver, const TrainConfig& cfg) {
  cfg.phi.validate();
  require(cfg.Lambda > 0.0 && std::isfinite(cfg.Lambda), kModule, "Lambda must be positive");
  require(cfg.grid_points >= 3, kModule, "radius grid needs at least 3 points");
  require(cfg.grid_floor > 0.0 && cfg.grid_floor < 1.0, kModule, "grid floor must lie in (0, 1)");
  require(cfg.tol > 0.0, kModule, "tolerance must be positive");

  const double M = solver.kernel().sup_bound();
  const double n = static_cast<double>(solver.sample().size());
  const double R_max = n / M;

  FitResult out{.g_hat = RepresenterFn::zero(solver.kernel()), .inner_values = {}};
  auto objective = [&](double R) {
    ++out.evaluations;
    return solver.inner(R) + cfg.Lambda * cfg.phi(M * R);
  };

  const std::size_t G = cfg.grid_points;
  std::vector<double> grid(G, 0.0);
  for (std::size_t k = 1; k < G; ++k) {
    const double frac = static_cast<double>(G - 1 - k) / static_cast<double>(G - 2);
    grid[k] = R_max * std::pow(cfg.grid_floor, frac);
  }
  std::vector<double> values(G);
  for (std::size_t k = 0; k < G; ++k) {
    values[k] = objective(grid[k]);
    out.inner_values.emplace_back(grid[k], values[k] - cfg.Lambda * cfg.phi(M * grid[k]));
  }
  const double grid_min = *std::min_element(values.begin(), values.end());
  const double slack = cfg.tol * std::max(1.0, std::abs(grid_min));
  std::size_t b = 0;
  while (values[b] > grid_min + slack) ++b;

  // golden section on the bracket around the grid minimizer (objective is convex in R)
  double a = grid[b == 0 ? 0 : b - 1];
  double c = grid[std::min(b + 1, G - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = c - inv_phi * (c - a), x2 = a + inv_phi * (c - a);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 200 && (c - a) > 1e-12 * std::max(c, 1e-300); ++it) {
    if (f1 <= f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - inv_phi * (c - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (c - a);
      f2 = objective(x2);
    }
  }
  const double R_gold = f1 <= f2 ? x1 : x2;
  const double F_gold = std::min(f1, f2);

  double R_opt = grid[b];
  if (F_gold < values[b] - slack) {
    R_opt = R_gold;
  } else if (F_gold > values[b] + slack) {
    out.grid_fallback = true;
  }

  const ConstrainedFit fit = solver.solve(R_opt);
  out.g_hat = fit.f;
  out.emp_hinge = fit.emp_hinge;
  out.R_opt = R_opt;
  out.R_hat_continuous = fit.norm;
  out.objective = fit.emp_hinge + cfg.Lambda * cfg.phi(M * fit.norm);
  out.path_events = solver.path().events();
  out.solver_fallback = fit.fallback;
  return out;
}

}  // namespace svmsel
