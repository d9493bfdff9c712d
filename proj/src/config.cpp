#include "svmsel/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "svmsel/error.hpp"

namespace svmsel {
namespace {

constexpr const char* kModule = "config";

using nlohmann::json;

[[noreturn]] void config_error(const std::string& message) { fail(ErrorCode::config, kModule, message); }

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) config_error(std::string(where) + " must be an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      config_error("unknown key '" + item.key() + "' in " + std::string(where));
  }
}

double get_number(const json& obj, std::string_view key, double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) config_error("'" + std::string(key) + "' must be a number");
  return it->get<double>();
}

std::uint64_t get_unsigned(const json& obj, std::string_view key, std::uint64_t fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer() || (!it->is_number_unsigned() && it->get<std::int64_t>() < 0))
    config_error("'" + std::string(key) + "' must be a nonnegative integer");
  return it->get<std::uint64_t>();
}

bool get_bool(const json& obj, std::string_view key, bool fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) config_error("'" + std::string(key) + "' must be true or false");
  return it->get<bool>();
}

std::string get_string(const json& obj, std::string_view key, const std::string& fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) config_error("'" + std::string(key) + "' must be a string");
  return it->get<std::string>();
}

std::vector<double> get_numbers(const json& obj, std::string_view key, std::vector<double> fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  std::vector<double> out;
  if (it->is_number()) return {it->get<double>()};
  if (!it->is_array()) config_error("'" + std::string(key) + "' must be a number or a list of numbers");
  for (const auto& v : *it) {
    if (!v.is_number()) config_error("'" + std::string(key) + "' must contain numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

Setting parse_setting(std::string_view name) {
  if (name == "s1") return Setting::s1;
  if (name == "s2") return Setting::s2;
  config_error("setting must be s1 or s2, got '" + std::string(name) + "'");
}

std::string check_phi(const std::string& name) {
  if (name != "linear" && name != "quadratic") config_error("phi must be linear or quadratic, got '" + name + "'");
  return name;
}

std::vector<std::string> parse_phis(const json& value) {
  std::vector<std::string> out;
  if (value.is_string()) {
    out.push_back(check_phi(value.get<std::string>()));
  } else if (value.is_array() && !value.empty()) {
    for (const auto& v : value) {
      if (!v.is_string()) config_error("phi entries must be strings");
      out.push_back(check_phi(v.get<std::string>()));
    }
  } else {
    config_error("phi must be a string or a nonempty list");
  }
  return out;
}

std::vector<std::size_t> parse_n_values(const json& value) {
  std::vector<std::size_t> out;
  auto one = [&](const json& v) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 2) config_error("n values must be integers >= 2");
    out.push_back(static_cast<std::size_t>(v.get<std::uint64_t>()));
  };
  if (value.is_array()) {
    for (const auto& v : value) one(v);
  } else {
    one(value);
  }
  if (out.empty()) config_error("n list is empty");
  return out;
}

EntropyModel entropy_from_json(const json& entry) {
  check_keys(entry, "entropy", {"model", "smoothness", "constant", "eps", "values"});
  const std::string model = get_string(entry, "model", "power_law");
  if (model == "power_law") return EntropyModel::power_law(get_number(entry, "smoothness", 1.0), get_number(entry, "constant", 1.0));
  if (model == "table") return EntropyModel::table(get_numbers(entry, "eps", {}), get_numbers(entry, "values", {}));
  config_error("entropy model must be power_law or table, got '" + model + "'");
}

json entropy_to_json(const EntropyModel& em) {
  if (em.is_power_law()) return {{"model", "power_law"}, {"smoothness", em.smoothness()}, {"constant", em.constant()}};
  return {{"model", "table"},
          {"eps", std::vector<double>(em.table_eps().begin(), em.table_eps().end())},
          {"values", std::vector<double>(em.table_values().begin(), em.table_values().end())}};
}

json normalize_kernel(const KernelSpec& spec, const json& entry) {
  json out = json::object();
  std::visit(
      [&](const auto& fam) {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, GaussianKernel>) {
          out["family"] = "gaussian";
          out["parameters"] = {{"bandwidth", fam.bandwidth}};
        } else if constexpr (std::is_same_v<T, CircleFourierKernel>) {
          out["family"] = "circle_fourier";
          out["parameters"] = {{"a0", fam.a0}, {"amplitude", fam.amplitude}, {"smoothness", fam.smoothness}};
          out["truncation"] = fam.truncation;
          out["closed_form"] = fam.closed_form;
        } else {
          out["family"] = "table";
          out["parameters"] = {{"points", fam.points}, {"values", fam.values}};
        }
      },
      spec.family());
  out["sup_bound"] = spec.sup_bound();
  if (entry.contains("name")) out["name"] = entry["name"];
  return out;
}

KernelEntry kernel_entry(const json& entry, std::size_t index) {
  KernelEntry k{"", kernel_from_json(entry), {}};
  k.name = entry.contains("name") ? get_string(entry, "name", "") : "k" + std::to_string(index);
  k.source = normalize_kernel(k.spec, entry);
  k.source["name"] = k.name;
  return k;
}

json default_kernel_json() {
  return {{"family", "circle_fourier"}, {"parameters", {{"a0", 1.0}, {"amplitude", 1.0}, {"smoothness", 1.0}}}};
}

json default_dist_json() { return {{"form", "hard_gap"}, {"frequency", 1}, {"eta0", 0.2}}; }

}  // namespace

const char* kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::spectrum: return "spectrum";
    case ExperimentKind::gamma: return "gamma";
    case ExperimentKind::calibrate: return "calibrate";
    case ExperimentKind::train: return "train";
    case ExperimentKind::select: return "select";
    case ExperimentKind::verify_oracle: return "verify-oracle";
    case ExperimentKind::rate_study: return "rate-study";
    case ExperimentKind::rademacher_check: return "rademacher-check";
    case ExperimentKind::risk: return "risk";
  }
  return "?";
}

const std::vector<std::string>& kind_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (int i = 0; i <= static_cast<int>(ExperimentKind::risk); ++i) out.emplace_back(kind_name(static_cast<ExperimentKind>(i)));
    return out;
  }();
  return names;
}

ExperimentKind parse_kind(std::string_view name) {
  const auto& names = kind_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<ExperimentKind>(i);
  config_error("unknown experiment '" + std::string(name) + "'");
}

KernelSpec kernel_from_json(const json& entry) {
  check_keys(entry, "kernel", {"name", "family", "parameters", "sup_bound", "truncation", "closed_form"});
  const std::string family = get_string(entry, "family", "");
  const json params = entry.value("parameters", json::object());
  KernelSpec spec = [&] {
    if (family == "gaussian") {
      check_keys(params, "gaussian parameters", {"bandwidth"});
      return KernelSpec::gaussian(get_number(params, "bandwidth", 1.0));
    }
    if (family == "circle_fourier") {
      check_keys(params, "circle_fourier parameters", {"a0", "amplitude", "smoothness"});
      const auto truncation = get_unsigned(entry, "truncation", KernelSpec::kDefaultTruncation);
      return KernelSpec::circle_fourier(get_number(params, "a0", 1.0), get_number(params, "amplitude", 1.0),
                                        get_number(params, "smoothness", 1.0), static_cast<std::int64_t>(truncation),
                                        get_bool(entry, "closed_form", true));
    }
    if (family == "table") {
      check_keys(params, "table parameters", {"points", "values"});
      return KernelSpec::table(get_numbers(params, "points", {}), get_numbers(params, "values", {}));
    }
    config_error("kernel family must be gaussian, circle_fourier or table, got '" + family + "'");
  }();
  if (entry.contains("sup_bound")) spec = spec.with_sup_bound(get_number(entry, "sup_bound", 1.0));
  return spec;
}

SyntheticDist dist_from_json(const json& entry) {
  check_keys(entry, "distribution", {"form", "frequency", "eta0", "eta1"});
  const std::string form = get_string(entry, "form", "hard_gap");
  const auto m = get_unsigned(entry, "frequency", 1);
  if (m < 1 || m > 1000000) config_error("frequency must lie in [1, 1e6]");
  if (form == "hard_gap") {
    if (entry.contains("eta1")) config_error("hard_gap takes no eta1 (it is 1/2 - eta0)");
    return SyntheticDist::hard_gap(static_cast<int>(m), get_number(entry, "eta0", 0.2));
  }
  if (form == "banded") {
    return SyntheticDist::banded(static_cast<int>(m), get_number(entry, "eta0", 0.1), get_number(entry, "eta1", 0.1));
  }
  config_error("distribution form must be hard_gap or banded, got '" + form + "'");
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.kernels.push_back(kernel_entry(default_kernel_json(), 0));
  cfg.dist_source = default_dist_json();
  cfg.dist = dist_from_json(cfg.dist_source);
  cfg.entropy_source = entropy_to_json(cfg.entropy);
  return cfg;
}

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  check_keys(doc, "config",
             {"experiment", "kernels", "kernel", "distribution", "n", "replicates", "seed", "workers", "phi",
              "setting", "delta", "c", "K", "eta0", "eta1", "entropy", "n_ref", "trailing", "additive",
              "spectrum_top", "mc_draws", "rademacher", "output"});
  ExperimentConfig cfg = default_config();
  try {
    if (doc.contains("experiment")) cfg.kind = parse_kind(get_string(doc, "experiment", ""));
    if (doc.contains("kernels") && doc.contains("kernel")) config_error("give either 'kernel' or 'kernels'");
    if (doc.contains("kernel")) {
      cfg.kernels = {kernel_entry(doc["kernel"], 0)};
    } else if (doc.contains("kernels")) {
      if (!doc["kernels"].is_array() || doc["kernels"].empty()) config_error("'kernels' must be a nonempty list");
      cfg.kernels.clear();
      for (std::size_t i = 0; i < doc["kernels"].size(); ++i) cfg.kernels.push_back(kernel_entry(doc["kernels"][i], i));
    }
    std::set<std::string> names;
    for (const auto& k : cfg.kernels)
      if (!names.insert(k.name).second) config_error("duplicate kernel name '" + k.name + "'");
    if (doc.contains("distribution")) {
      cfg.dist = dist_from_json(doc["distribution"]);
      cfg.dist_source = doc["distribution"];
    }
    if (doc.contains("n")) cfg.n_values = parse_n_values(doc["n"]);
    cfg.replicates = get_unsigned(doc, "replicates", cfg.replicates);
    if (cfg.replicates < 1) config_error("replicates must be >= 1");
    cfg.seed = get_unsigned(doc, "seed", cfg.seed);
    cfg.workers = get_unsigned(doc, "workers", cfg.workers);
    if (cfg.workers < 1) config_error("workers must be >= 1");
    if (doc.contains("phi")) cfg.phis = parse_phis(doc["phi"]);
    if (doc.contains("setting")) cfg.setting = parse_setting(get_string(doc, "setting", ""));
    cfg.delta = get_number(doc, "delta", cfg.delta);
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) config_error("delta must lie in (0, 1)");
    cfg.c = get_number(doc, "c", cfg.c);
    if (!(cfg.c > 0.0)) config_error("c must be positive");
    cfg.K = get_number(doc, "K", cfg.K);
    if (!(cfg.K > 1.0)) config_error("K must exceed 1");
    if (doc.contains("eta0") && !doc["eta0"].is_null()) cfg.eta0 = get_number(doc, "eta0", 0.0);
    if (doc.contains("eta1") && !doc["eta1"].is_null()) cfg.eta1 = get_number(doc, "eta1", 0.0);
    if (doc.contains("entropy")) {
      cfg.entropy = entropy_from_json(doc["entropy"]);
      cfg.entropy_source = entropy_to_json(cfg.entropy);
    }
    cfg.n_ref = get_unsigned(doc, "n_ref", cfg.n_ref);
    if (cfg.n_ref < 2) config_error("n_ref must be >= 2");
    const std::string trailing = get_string(doc, "trailing", "inverse");
    if (trailing != "inverse" && trailing != "c_w1") config_error("trailing must be inverse or c_w1");
    cfg.trailing_c_w1 = trailing == "c_w1";
    const std::string additive = get_string(doc, "additive", "inverse");
    if (additive != "inverse" && additive != "w1") config_error("additive must be inverse or w1");
    cfg.additive_w1 = additive == "w1";
    cfg.spectrum_top = get_unsigned(doc, "spectrum_top", cfg.spectrum_top);
    if (cfg.spectrum_top < 1) config_error("spectrum_top must be >= 1");
    cfg.mc_draws = get_unsigned(doc, "mc_draws", cfg.mc_draws);
    if (cfg.mc_draws < 2) config_error("mc_draws must be >= 2");
    if (doc.contains("rademacher")) {
      const json& rc = doc["rademacher"];
      check_keys(rc, "rademacher", {"dims", "radii", "r", "x_draws", "sign_draws"});
      cfg.rademacher.dims = get_unsigned(rc, "dims", cfg.rademacher.dims);
      cfg.rademacher.radii = get_numbers(rc, "radii", cfg.rademacher.radii);
      cfg.rademacher.r_values = get_numbers(rc, "r", cfg.rademacher.r_values);
      cfg.rademacher.x_draws = get_unsigned(rc, "x_draws", cfg.rademacher.x_draws);
      cfg.rademacher.sign_draws = get_unsigned(rc, "sign_draws", cfg.rademacher.sign_draws);
      if (cfg.rademacher.x_draws < 1) config_error("rademacher.x_draws must be >= 1");
    }
    cfg.output = get_string(doc, "output", cfg.output);
  } catch (const json::exception& e) {
    config_error(std::string("malformed config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config) throw;
    fail(ErrorCode::config, kModule, "[" + e.module() + "] " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, kModule, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

json config_to_json(const ExperimentConfig& cfg) {
  json out;
  out["experiment"] = kind_name(cfg.kind);
  out["kernels"] = json::array();
  for (const auto& k : cfg.kernels) out["kernels"].push_back(k.source);
  out["distribution"] = cfg.dist_source;
  out["n"] = cfg.n_values;
  out["replicates"] = cfg.replicates;
  out["seed"] = cfg.seed;
  out["workers"] = cfg.workers;
  out["phi"] = cfg.phis;
  out["setting"] = setting_name(cfg.setting);
  out["delta"] = cfg.delta;
  out["c"] = cfg.c;
  out["K"] = cfg.K;
  out["eta0"] = cfg.eta0 ? json(*cfg.eta0) : json(nullptr);
  out["eta1"] = cfg.eta1 ? json(*cfg.eta1) : json(nullptr);
  out["entropy"] = cfg.entropy_source;
  out["n_ref"] = cfg.n_ref;
  out["trailing"] = cfg.trailing_c_w1 ? "c_w1" : "inverse";
  out["additive"] = cfg.additive_w1 ? "w1" : "inverse";
  out["spectrum_top"] = cfg.spectrum_top;
  out["mc_draws"] = cfg.mc_draws;
  out["rademacher"] = {{"dims", cfg.rademacher.dims},
                       {"radii", cfg.rademacher.radii},
                       {"r", cfg.rademacher.r_values},
                       {"x_draws", cfg.rademacher.x_draws},
                       {"sign_draws", cfg.rademacher.sign_draws}};
  out["output"] = cfg.output;
  return out;
}

void apply_override(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  auto number = [&] {
    double v = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size())
      config_error("--" + std::string(key) + " expects a number, got '" + std::string(value) + "'");
    return v;
  };
  auto integer = [&] {
    std::uint64_t v = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size())
      config_error("--" + std::string(key) + " expects a nonnegative integer, got '" + std::string(value) + "'");
    return v;
  };
  if (key == "experiment") {
    cfg.kind = parse_kind(value);
  } else if (key == "seed") {
    cfg.seed = integer();
  } else if (key == "workers") {
    cfg.workers = integer();
    if (cfg.workers < 1) config_error("workers must be >= 1");
  } else if (key == "phi") {
    cfg.phis = {check_phi(std::string(value))};
  } else if (key == "setting") {
    cfg.setting = parse_setting(value);
  } else if (key == "c") {
    cfg.c = number();
    if (!(cfg.c > 0.0)) config_error("c must be positive");
  } else if (key == "delta") {
    cfg.delta = number();
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) config_error("delta must lie in (0, 1)");
  } else if (key == "out" || key == "output") {
    cfg.output = std::string(value);
  } else if (key == "replicates") {
    cfg.replicates = integer();
    if (cfg.replicates < 1) config_error("replicates must be >= 1");
  } else {
    config_error("unknown override '" + std::string(key) + "'");
  }
}

}  // namespace svmsel
