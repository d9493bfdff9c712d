#include "svmsel/spectrum.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include <gsl/gsl_sf_zeta.h>

#include "svmsel/error.hpp"

namespace svmsel {
namespace {

constexpr const char* kModule = "spectrum";

// Eigenvalues {a0} u {A k^{-p} / 2 (twice) : 1 <= k <= kmax}, sorted nonincreasing.
// a0 sits right after the first 2*k0 pair entries.
struct PairSpectrum {
  double a0;
  double amplitude;
  double p;
  std::int64_t kmax;  // < 0 for an infinite series
  std::int64_t k0;

  bool finite() const { return kmax >= 0; }

  double pair_value(std::int64_t k) const {
    if (finite() && k > kmax) return 0.0;
    return 0.5 * amplitude * std::pow(static_cast<double>(k), -p);
  }

  // sum_{k >= q} A k^{-p}, restricted to k <= kmax.
  double frequency_tail(std::int64_t q) const {
    if (amplitude == 0.0) return 0.0;
    if (finite() && q > kmax) return 0.0;
    double z = gsl_sf_hzeta(p, static_cast<double>(q));
    if (finite()) z -= gsl_sf_hzeta(p, static_cast<double>(kmax) + 1.0);
    return amplitude * std::max(z, 0.0);
  }

  // Sum of pair entries after the first c of them.
  double pair_tail(std::int64_t c) const {
    const std::int64_t full = c / 2;
    double t = frequency_tail(full + 1);
    if (c % 2 == 1) t -= pair_value(full + 1);
    return std::max(t, 0.0);
  }

  double value(std::int64_t j) const {
    if (j <= 2 * k0) return pair_value((j + 1) / 2);
    if (j == 2 * k0 + 1) return a0;
    return pair_value(j / 2);
  }

  double tail(std::int64_t d) const {
    if (d <= 2 * k0) return pair_tail(d) + a0;
    return pair_tail(d - 1);
  }
};

}  // namespace

SpectrumModel SpectrumModel::from_eigenvalues(std::vector<double> values) {
  for (double& v : values) {
    require(std::isfinite(v), kModule, "eigenvalues must be finite");
    v = std::max(v, 0.0);
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  SpectrumModel model;
  model.prefix_ = std::move(values);
  model.suffix_.assign(model.prefix_.size() + 1, 0.0);
  for (std::size_t d = model.prefix_.size(); d-- > 0;) model.suffix_[d] = model.suffix_[d + 1] + model.prefix_[d];
  return model;
}

SpectrumModel SpectrumModel::with_tail_rule(std::vector<double> prefix, std::function<double(std::size_t)> tail_rule) {
  require(static_cast<bool>(tail_rule), kModule, "tail rule must be callable");
  for (std::size_t j = 0; j < prefix.size(); ++j) {
    require(std::isfinite(prefix[j]) && prefix[j] >= 0.0, kModule, "eigenvalues must be finite and nonnegative");
    if (j > 0) require(prefix[j] <= prefix[j - 1], kModule, "eigenvalue prefix must be nonincreasing");
  }
  SpectrumModel model = from_eigenvalues(std::move(prefix));
  model.tail_after_prefix_ = tail_rule(model.prefix_.size());
  model.tail_rule_ = std::move(tail_rule);
  return model;
}

double SpectrumModel::tail_sum(std::size_t d) const {
  if (d <= prefix_.size()) return suffix_[d] + tail_after_prefix_;
  if (!tail_rule_) return 0.0;
  return tail_rule_(d);
}

double SpectrumModel::eigenvalue(std::size_t j) const {
  require(j >= 1, kModule, "eigenvalue index is 1-based");
  if (j <= prefix_.size()) return prefix_[j - 1];
  if (!tail_rule_) return 0.0;
  return std::max(tail_sum(j - 1) - tail_sum(j), 0.0);
}

std::size_t SpectrumModel::rank() const {
  if (tail_rule_ && tail_after_prefix_ > 0.0) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(std::count_if(prefix_.begin(), prefix_.end(), [](double v) { return v > 0.0; }));
}

SpectrumModel analytic_spectrum(const KernelSpec& kernel, std::size_t prefix) {
  const auto* circle = std::get_if<CircleFourierKernel>(&kernel.family());
  if (circle == nullptr) {
    fail(ErrorCode::invalid_argument, kModule, "analytic spectrum requires a circle_fourier kernel");
  }
  require(prefix >= 1, kModule, "spectrum prefix must be positive");

  PairSpectrum ps{};
  ps.a0 = circle->a0;
  ps.amplitude = circle->amplitude;
  ps.p = 2.0 * circle->smoothness;
  ps.kmax = kernel.effective_truncation();

  constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max() / 4;
  if (ps.amplitude == 0.0) {
    return SpectrumModel::from_eigenvalues({ps.a0});
  }
  if (ps.a0 <= 0.0) {
    ps.k0 = ps.finite() ? ps.kmax : kUnbounded;
  } else {
    // number of k with A k^{-p} / 2 > a0
    const double kf = std::pow(ps.amplitude / (2.0 * ps.a0), 1.0 / ps.p);
    std::int64_t k0 = static_cast<std::int64_t>(std::min(std::floor(kf), 1e15));
    while (k0 > 0 && !(ps.pair_value(k0) > ps.a0)) --k0;
    while (ps.pair_value(k0 + 1) > ps.a0 && (!ps.finite() || k0 + 1 <= ps.kmax)) ++k0;
    ps.k0 = ps.finite() ? std::min(k0, ps.kmax) : k0;
  }

  if (ps.finite()) {
    const std::size_t rank = static_cast<std::size_t>(2 * ps.kmax + (ps.a0 > 0.0 ? 1 : 0));
    if (rank <= prefix) {
      std::vector<double> values(rank);
      for (std::size_t j = 1; j <= rank; ++j) values[j - 1] = ps.value(static_cast<std::int64_t>(j));
      return SpectrumModel::from_eigenvalues(std::move(values));
    }
  }
  std::vector<double> values(prefix);
  for (std::size_t j = 1; j <= prefix; ++j) values[j - 1] = ps.value(static_cast<std::int64_t>(j));
  return SpectrumModel::with_tail_rule(std::move(values),
                                       [ps](std::size_t d) { return ps.tail(static_cast<std::int64_t>(d)); });
}

SpectrumModel empirical_spectrum(const Eigen::MatrixXd& gram, std::size_t n) {
  require(gram.rows() == gram.cols(), kModule, "gram matrix must be square");
  require(n >= 1, kModule, "sample size must be positive");
  const double scale = std::max(gram.cwiseAbs().maxCoeff(), 1e-300);
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    fail(ErrorCode::invalid_argument, kModule, "gram matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram / static_cast<double>(n), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorCode::convergence, kModule, "eigensolver failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return SpectrumModel::from_eigenvalues(std::vector<double>(ev.data(), ev.data() + ev.size()));
}

void write_spectrum_csv(std::ostream& out, const SpectrumModel& spectrum, std::size_t max_rows) {
  out << "index,eigenvalue\n";
  const std::size_t rows = max_rows == 0 ? spectrum.prefix_size() : std::min(max_rows, spectrum.prefix_size());
  char buf[64];
  for (std::size_t j = 0; j < rows; ++j) {
    auto res = std::to_chars(buf, buf + sizeof buf, spectrum.prefix()[j]);
    out << (j + 1) << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
  }
}

}  // namespace svmsel
