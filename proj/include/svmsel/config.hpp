#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "svmsel/complexity.hpp"
#include "svmsel/rkhs.hpp"
#include "svmsel/synthgen.hpp"

namespace svmsel {

enum class ExperimentKind { spectrum, gamma, calibrate, train, select, verify_oracle, rate_study, rademacher_check, risk };

const char* kind_name(ExperimentKind kind);
ExperimentKind parse_kind(std::string_view name);
const std::vector<std::string>& kind_names();

struct KernelEntry {
  std::string name;
  KernelSpec spec;
  nlohmann::json source;  // normalized config entry
};

struct RademacherConfig {
  std::size_t dims = 8;
  std::vector<double> radii{0.5, 1.0, 2.0};
  std::vector<double> r_values{0.01, 0.1, 1.0};
  /// Input draws averaged per grid cell.
  std::size_t x_draws = 20;
  /// 0 enumerates all sign vectors (n <= 20); otherwise Monte Carlo draws.
  std::size_t sign_draws = 0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::verify_oracle;
  std::vector<KernelEntry> kernels;
  SyntheticDist dist = SyntheticDist::hard_gap(1, 0.2);
  nlohmann::json dist_source;
  std::vector<std::size_t> n_values{512};
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::vector<std::string> phis{"linear", "quadratic"};
  Setting setting = Setting::s1;
  double delta = 0.05;
  double c = 1.0;
  double K = 3.0;
  std::optional<double> eta0;  // defaults to the distribution's
  std::optional<double> eta1;
  EntropyModel entropy = EntropyModel::power_law(1.0, 1.0);
  nlohmann::json entropy_source;
  std::size_t n_ref = 1024;
  /// Oracle trailing term c w1 eta0^-1 instead of w1^-1 eta0^-1.
  bool trailing_c_w1 = false;
  /// Additive penalty w1 eta0^-1 instead of w1^-1 eta0^-1.
  bool additive_w1 = false;
  std::size_t spectrum_top = 5;
  std::size_t mc_draws = 100000;
  RademacherConfig rademacher;
  std::string output = "out";

  double eta0_value() const { return eta0.value_or(dist.eta0()); }
  double eta1_value() const { return eta1.value_or(dist.eta1()); }
};

ExperimentConfig default_config();

/// Parses a JSON config; missing keys keep their defaults, unknown keys are errors.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Normalized JSON form; parse_config(to_json(cfg)) reproduces cfg.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// CLI-style override, e.g. ("phi", "linear"), ("seed", "7"), ("delta", "0.1").
void apply_override(ExperimentConfig& cfg, std::string_view key, std::string_view value);

KernelSpec kernel_from_json(const nlohmann::json& entry);
SyntheticDist dist_from_json(const nlohmann::json& entry);

}  // namespace svmsel
