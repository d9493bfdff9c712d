// svmsel command line: one subcommand per experiment kind.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svmsel.h"

namespace {

std::string fetch(int (*fn)(const svmsel_config*, char*, size_t, size_t*), const svmsel_config* cfg) {
  size_t need = 0;
  if (fn(cfg, nullptr, 0, &need) != SVMSEL_OK) return {};
  std::string out(need, '\0');
  fn(cfg, out.data(), out.size(), &need);
  out.resize(need - 1);
  return out;
}

std::string default_config_text() {
  svmsel_config* cfg = nullptr;
  if (svmsel_config_default(&cfg) != SVMSEL_OK) return "(unavailable)";
  std::string text = fetch(svmsel_config_to_json, cfg);
  svmsel_config_free(cfg);
  return text;
}

std::vector<std::string> experiment_names() {
  size_t need = 0;
  svmsel_experiment_names(nullptr, 0, &need);
  std::string text(need, '\0');
  svmsel_experiment_names(text.data(), text.size(), &need);
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\0') {
      cur += ch;
    }
  }
  return out;
}

int report_failure(const char* what, int status) {
  std::fprintf(stderr, "svmsel: %s failed (%s): %s\n", what, svmsel_status_name(status), svmsel_last_error());
  return status == SVMSEL_ERR_CONFIG || status == SVMSEL_ERR_INVALID_ARGUMENT ? 2 : 1;
}

struct Options {
  std::string config;
  std::string out;
  std::string seed;
  std::string workers;
  std::string phi;
  std::string setting;
  std::string c;
  std::string delta;
  std::string replicates;
};

int run(const std::string& experiment, const Options& opt) {
  svmsel_config* cfg = nullptr;
  int st = opt.config.empty() ? svmsel_config_default(&cfg) : svmsel_config_from_file(opt.config.c_str(), &cfg);
  if (st != SVMSEL_OK) return report_failure("reading config", st);

  const std::pair<const char*, const std::string*> overrides[] = {
      {"experiment", &experiment}, {"out", &opt.out},         {"seed", &opt.seed},
      {"workers", &opt.workers},   {"phi", &opt.phi},         {"setting", &opt.setting},
      {"c", &opt.c},               {"delta", &opt.delta},     {"replicates", &opt.replicates},
  };
  for (const auto& [key, value] : overrides) {
    if (value->empty()) continue;
    st = svmsel_config_set(cfg, key, value->c_str());
    if (st != SVMSEL_OK) {
      svmsel_config_free(cfg);
      return report_failure("applying options", st);
    }
  }

  const std::string out_dir = fetch(svmsel_config_output_dir, cfg);
  svmsel_report* report = nullptr;
  st = svmsel_run(cfg, &report);
  svmsel_config_free(cfg);
  if (st != SVMSEL_OK) return report_failure(experiment.c_str(), st);

  st = svmsel_report_write(report, out_dir.c_str());
  size_t rows = 0;
  svmsel_report_row_count(report, &rows);
  svmsel_report_free(report);
  if (st != SVMSEL_OK) return report_failure("writing report", st);
  std::printf("%s: %zu rows written to %s\n", experiment.c_str(), rows, out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"svmsel: penalized kernel SVM model selection experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", svmsel_version());
  app.footer("Config files are JSON; omitted keys take these defaults:\n" + default_config_text() +
             "\n\nOutputs: rows.csv (one row per replicate/model), summary.json, plus experiment-specific CSVs.");

  Options opt;
  std::string chosen;
  for (const std::string& name : experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", opt.config, "JSON config file (defaults listed below)")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (default: config 'output', \"out\")");
    sub->add_option("--seed", opt.seed, "master seed, u64 (default 1)");
    sub->add_option("--workers", opt.workers, "worker threads (default 1); results do not depend on it");
    sub->add_option("--phi", opt.phi, "regularizer (default: both)")->check(CLI::IsMember({"linear", "quadratic"}));
    sub->add_option("--setting", opt.setting, "complexity setting (default s1)")->check(CLI::IsMember({"s1", "s2"}));
    sub->add_option("--c", opt.c, "penalty constant c (default 1)");
    sub->add_option("--delta", opt.delta, "confidence delta in (0,1) (default 0.05)");
    sub->add_option("--replicates", opt.replicates, "replicate count (default 1)");
    sub->callback([&chosen, name] { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);
  return run(chosen, opt);
}
