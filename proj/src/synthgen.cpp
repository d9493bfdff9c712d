#include "svmsel/synthgen.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "svmsel/error.hpp"
#include "svmsel/rkhs.hpp"
#include "svmsel/rng.hpp"

namespace svmsel {
namespace {

constexpr const char* kModule = "synthgen";

std::vector<double> half_period_breaks(int m) {
  std::vector<double> out(static_cast<std::size_t>(2 * m + 1));
  for (int j = 0; j <= 2 * m; ++j) out[static_cast<std::size_t>(j)] = static_cast<double>(j) / (2.0 * m);
  return out;
}

}  // namespace

SyntheticDist SyntheticDist::hard_gap(int frequency, double eta0) {
  require(frequency >= 1, kModule, "frequency m must be >= 1");
  require(eta0 > 0.0 && eta0 <= 0.5, kModule, "hard_gap needs eta0 in (0, 1/2], got " + std::to_string(eta0));
  SyntheticDist d;
  d.form_ = Form::hard_gap;
  d.frequency_ = frequency;
  d.eta0_ = eta0;
  d.eta1_ = 0.5 - eta0;
  d.breaks_ = half_period_breaks(frequency);
  return d;
}

SyntheticDist SyntheticDist::banded(int frequency, double eta0, double eta1) {
  require(frequency >= 1, kModule, "frequency m must be >= 1");
  require(eta0 > 0.0 && eta1 > 0.0, kModule, "banded needs eta0 > 0 and eta1 > 0");
  if (eta0 + eta1 > 0.5) {
    fail(ErrorCode::invalid_argument, kModule,
         "banded needs eta0 + eta1 <= 1/2, got " + std::to_string(eta0) + " + " + std::to_string(eta1));
  }
  SyntheticDist d;
  d.form_ = Form::banded;
  d.frequency_ = frequency;
  d.eta0_ = eta0;
  d.eta1_ = eta1;
  d.breaks_ = half_period_breaks(frequency);
  return d;
}

std::string_view SyntheticDist::form_name() const { return form_ == Form::hard_gap ? "hard_gap" : "banded"; }

int SyntheticDist::bayes(double x) const {
  if (!std::isfinite(x)) fail(ErrorCode::domain, kModule, "input point is not finite");
  const double t = wrap_circle(x) * 2.0 * frequency_;
  const double j = std::floor(t);
  if (t == j) return 1;
  return static_cast<long long>(j) % 2 == 0 ? 1 : -1;
}

double SyntheticDist::eta(double x) const {
  const int s = bayes(x);
  if (form_ == Form::hard_gap) return 0.5 + s * eta0_;
  const double amp = std::abs(std::sin(2.0 * std::numbers::pi * frequency_ * wrap_circle(x)));
  return 0.5 + s * (eta0_ + (0.5 - eta1_ - eta0_) * amp);
}

Sample draw_sample(const SyntheticDist& dist, std::size_t n, std::uint64_t seed) {
  require(n >= 1, kModule, "sample size must be >= 1");
  Rng rng(seed);
  Sample s;
  s.x.resize(n);
  s.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.x[i] = rng.uniform();
    s.y[i] = rng.bernoulli(dist.eta(s.x[i])) ? 1 : -1;
  }
  return s;
}

void write_sample_csv(std::ostream& out, const Sample& sample) {
  out << "x,y\n";
  char buf[64];
  for (std::size_t i = 0; i < sample.size(); ++i) {
    auto res = std::to_chars(buf, buf + sizeof buf, sample.x[i]);
    out << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << ',' << sample.y[i] << '\n';
  }
}

}  // namespace svmsel
