#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace svmsel {

/// Labelled sample on the circle; y_i in {-1, +1}.
struct Sample {
  std::vector<double> x;
  std::vector<int> y;

  std::size_t size() const { return x.size(); }
};

/// Uniform marginal on [0, 1) with P(Y = 1 | X = x) = eta(x).
///   hard_gap: eta = 1/2 + eta0 sgn(sin 2 pi m x)
///   banded:   eta = 1/2 + sgn(sin 2 pi m x) (eta0 + (1/2 - eta1 - eta0) |sin 2 pi m x|)
/// sgn(0) = +1, so the Bayes classifier is +1 on every breakpoint.
class SyntheticDist {
 public:
  enum class Form { hard_gap, banded };

  static SyntheticDist hard_gap(int frequency, double eta0);
  static SyntheticDist banded(int frequency, double eta0, double eta1);

  Form form() const { return form_; }
  std::string_view form_name() const;
  int frequency() const { return frequency_; }

  /// Margin condition constant: |eta - 1/2| >= eta0.
  double eta0() const { return eta0_; }
  /// Lower bound on min(eta, 1 - eta); 1/2 - eta0 for hard_gap.
  double eta1() const { return eta1_; }

  double eta(double x) const;
  int bayes(double x) const;

  /// Sign changes of sin(2 pi m x) in [0, 1]: j / (2m), j = 0..2m. eta is smooth between them.
  std::span<const double> breakpoints() const { return breaks_; }

 private:
  Form form_ = Form::hard_gap;
  int frequency_ = 1;
  double eta0_ = 0.0;
  double eta1_ = 0.0;
  std::vector<double> breaks_;
};

Sample draw_sample(const SyntheticDist& dist, std::size_t n, std::uint64_t seed);

/// "x,y" rows with shortest round-trip formatting.
void write_sample_csv(std::ostream& out, const Sample& sample);

}  // namespace svmsel
