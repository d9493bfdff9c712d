#include "svmsel.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "svmsel/config.hpp"
#include "svmsel/error.hpp"
#include "svmsel/experiment.hpp"
#include "svmsel/rkhs.hpp"

struct svmsel_config {
  svmsel::ExperimentConfig cfg;
};

struct svmsel_report {
  svmsel::ExperimentReport report;
  std::string rows_csv;
  std::string summary_json;
};

struct svmsel_kernel {
  svmsel::KernelSpec spec;
};

namespace {

thread_local std::string last_error;

int set_error(int status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return SVMSEL_OK;
  } catch (const svmsel::Error& e) {
    return set_error(static_cast<int>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SVMSEL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SVMSEL_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(SVMSEL_ERR_INTERNAL, "unknown exception");
  }
}

int copy_out(const std::string& text, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (cap == 0 && buf == nullptr) return SVMSEL_OK;
  if (buf == nullptr) return set_error(SVMSEL_ERR_NULL, "output buffer is null");
  if (cap < text.size() + 1) return set_error(SVMSEL_ERR_BUFFER, "output buffer too small");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return SVMSEL_OK;
}

#define SVMSEL_REQUIRE_PTR(p) \
  if ((p) == nullptr) return set_error(SVMSEL_ERR_NULL, #p " is null")

}  // namespace

extern "C" {

const char* svmsel_version(void) { return "1.0.0"; }

const char* svmsel_status_name(int status) {
  switch (status) {
    case SVMSEL_OK: return "ok";
    case SVMSEL_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SVMSEL_ERR_DOMAIN: return "domain";
    case SVMSEL_ERR_NOT_PSD: return "not_psd";
    case SVMSEL_ERR_CONVERGENCE: return "convergence";
    case SVMSEL_ERR_CONFIG: return "config";
    case SVMSEL_ERR_IO: return "io";
    case SVMSEL_ERR_NULL: return "null";
    case SVMSEL_ERR_BUFFER: return "buffer";
    default: return "internal";
  }
}

const char* svmsel_last_error(void) { return last_error.c_str(); }

int svmsel_config_default(svmsel_config** out) {
  SVMSEL_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] { *out = new svmsel_config{svmsel::default_config()}; });
}

int svmsel_config_from_json(const char* text, svmsel_config** out) {
  SVMSEL_REQUIRE_PTR(text);
  SVMSEL_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] { *out = new svmsel_config{svmsel::parse_config(text)}; });
}

int svmsel_config_from_file(const char* path, svmsel_config** out) {
  SVMSEL_REQUIRE_PTR(path);
  SVMSEL_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] { *out = new svmsel_config{svmsel::load_config(path)}; });
}

int svmsel_config_set(svmsel_config* cfg, const char* key, const char* value) {
  SVMSEL_REQUIRE_PTR(cfg);
  SVMSEL_REQUIRE_PTR(key);
  SVMSEL_REQUIRE_PTR(value);
  return guarded([&] {
    svmsel::ExperimentConfig copy = cfg->cfg;
    svmsel::apply_override(copy, key, value);
    cfg->cfg = std::move(copy);
  });
}

int svmsel_config_to_json(const svmsel_config* cfg, char* buf, size_t cap, size_t* needed) {
  SVMSEL_REQUIRE_PTR(cfg);
  std::string text;
  const int st = guarded([&] { text = svmsel::config_to_json(cfg->cfg).dump(2); });
  return st != SVMSEL_OK ? st : copy_out(text, buf, cap, needed);
}

int svmsel_config_output_dir(const svmsel_config* cfg, char* buf, size_t cap, size_t* needed) {
  SVMSEL_REQUIRE_PTR(cfg);
  last_error.clear();
  return copy_out(cfg->cfg.output, buf, cap, needed);
}

void svmsel_config_free(svmsel_config* cfg) { delete cfg; }

int svmsel_experiment_names(char* buf, size_t cap, size_t* needed) {
  std::string text;
  for (const auto& name : svmsel::kind_names()) text += name + "\n";
  last_error.clear();
  return copy_out(text, buf, cap, needed);
}

int svmsel_run(const svmsel_config* cfg, svmsel_report** out) {
  SVMSEL_REQUIRE_PTR(cfg);
  SVMSEL_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] {
    auto* rep = new svmsel_report{svmsel::run_experiment(cfg->cfg), {}, {}};
    rep->rows_csv = rep->report.rows.to_csv();
    rep->summary_json = svmsel::dump_json(rep->report.summary);
    *out = rep;
  });
}

int svmsel_report_write(const svmsel_report* report, const char* dir) {
  SVMSEL_REQUIRE_PTR(report);
  SVMSEL_REQUIRE_PTR(dir);
  return guarded([&] { svmsel::write_report(report->report, dir); });
}

int svmsel_report_rows_csv(const svmsel_report* report, char* buf, size_t cap, size_t* needed) {
  SVMSEL_REQUIRE_PTR(report);
  last_error.clear();
  return copy_out(report->rows_csv, buf, cap, needed);
}

int svmsel_report_summary_json(const svmsel_report* report, char* buf, size_t cap, size_t* needed) {
  SVMSEL_REQUIRE_PTR(report);
  last_error.clear();
  return copy_out(report->summary_json, buf, cap, needed);
}

int svmsel_report_row_count(const svmsel_report* report, size_t* rows) {
  SVMSEL_REQUIRE_PTR(report);
  SVMSEL_REQUIRE_PTR(rows);
  last_error.clear();
  *rows = report->report.rows.size();
  return SVMSEL_OK;
}

void svmsel_report_free(svmsel_report* report) { delete report; }

int svmsel_kernel_from_json(const char* text, svmsel_kernel** out) {
  SVMSEL_REQUIRE_PTR(text);
  SVMSEL_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      svmsel::fail(svmsel::ErrorCode::config, "config", std::string("invalid JSON: ") + e.what());
    }
    *out = new svmsel_kernel{svmsel::kernel_from_json(doc)};
  });
}

int svmsel_kernel_eval(const svmsel_kernel* k, double x, double y, double* value) {
  SVMSEL_REQUIRE_PTR(k);
  SVMSEL_REQUIRE_PTR(value);
  return guarded([&] { *value = k->spec(x, y); });
}

int svmsel_kernel_sup_bound(const svmsel_kernel* k, double* value) {
  SVMSEL_REQUIRE_PTR(k);
  SVMSEL_REQUIRE_PTR(value);
  last_error.clear();
  *value = k->spec.sup_bound();
  return SVMSEL_OK;
}

int svmsel_kernel_gram(const svmsel_kernel* k, const double* xs, size_t n, double* out) {
  SVMSEL_REQUIRE_PTR(k);
  SVMSEL_REQUIRE_PTR(xs);
  SVMSEL_REQUIRE_PTR(out);
  return guarded([&] {
    const Eigen::MatrixXd G = svmsel::gram(k->spec, std::span<const double>(xs, n));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) out[i * n + j] = G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  });
}

void svmsel_kernel_free(svmsel_kernel* k) { delete k; }

}  // extern "C"
