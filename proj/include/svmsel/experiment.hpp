#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "svmsel/config.hpp"
#include "svmsel/report.hpp"

namespace svmsel {

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::verify_oracle;
  Table rows;
  /// {"experiment", "config", "statistics"}; statistics = summarize(kind, rows).
  nlohmann::json summary;
  /// Additional CSV files (file name, table).
  std::vector<std::pair<std::string, Table>> extra;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Statistics derived from the rows alone.
nlohmann::json summarize(ExperimentKind kind, const Table& rows);

/// rows.csv, summary.json and the extra tables into `dir`.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

/// OLS fit of log(value) on log(n) with a two-sided 95% Student-t band for the slope.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t points = 0;
};

RateFit rate_study_fit(std::span<const double> n, std::span<const double> values);

nlohmann::json to_json(const RateFit& fit);

}  // namespace svmsel
