#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace kslab::app {

using nlohmann::json;

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t = {
      {"doubling_interval", 2.1},     // C_D bound on interval grids
      {"doubling_square", 4.4},       // C_D bound on square grids, interior centers
      {"doubling_stability", 1.2},    // C_D across one resolution step
      {"calibration", 0.05},          // fitted limit vs closed form, relative
      {"calibration_2d", 0.10},       // E(x, 0.05) on the square vs 1/4, relative
      {"comparability_line", 1.05},   // interval grid, f = x
      {"comparability", 10.0},        // every other field
      {"stability", 2.0},             // generic max/min factor across scales or resolutions
      {"cutoff_stability", 4.0},
      {"maximal_stability", 4.0},     // weak-L2 quotient across resolutions
      {"overlap_factor", 1.25},       // overlap_5eps max/min across two eps
      {"poincare_lip", 0.10},         // relative deviation from 1/3 for x on the interval
      {"mode_factor", 4.0},           // ks vs lip Poincare constants on the interval
      {"telescoping", 4.0},
      {"walkdim_agree", 0.15},        // ks_scaling vs eigen_ratio
      {"walkdim_grid", 0.10},         // |d_w_hat - 2| on grids
      {"eigen_walkdim", 0.05},        // eigen_ratio vs the known value
      {"heat_residual", 1.0},
      {"heat_exponent", 0.2},
      {"spectral_dim", 0.05},         // |d_s/2 - known| on the gasket
      {"gamma_lip", 0.10},
      {"form_energy", 0.02},
      {"compactness_delta", 0.1},     // L2 radius of the compactness net
      {"net_fraction", 0.5},          // compactness net size / family size
  };
  return t;
}

const std::vector<std::string>& known_fields() {
  static const std::vector<std::string> f = {"x", "x2", "sin", "step", "spike", "harmonic", "harmonic2", "eigen1",
                                             "eigen2", "eigen3", "dist"};
  return f;
}

double ExperimentConfig::tol(const std::string& name) const {
  const auto it = tolerances.find(name);
  if (it == tolerances.end()) throw std::logic_error("unknown tolerance " + name);
  return it->second;
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) fail("unknown key '" + k + "' in " + where);
  }
}

double get_number(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where + "." + key + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where + "." + key + " must be finite");
  return d;
}

long long get_integer(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(where + "." + key + " must be an integer");
  return v.get<long long>();
}

SpaceSpec parse_space(const json& s) {
  if (!s.is_object()) fail("space must be an object");
  if (!s.contains("kind") || !s["kind"].is_string()) fail("space.kind must be a string");
  const std::string kind = s["kind"];
  if (kind == "interval_grid" || kind == "square_grid") {
    reject_unknown(s, {"kind", "n"}, "space");
    if (!s.contains("n")) fail("space.n is required for " + kind);
    const long long n = get_integer(s, "n", "space");
    const long long hi = kind == "interval_grid" ? 200001 : 1001;
    if (n < 2 || n > hi) fail("space.n must be in [2, " + std::to_string(hi) + "]");
    return kind == "interval_grid" ? SpaceSpec::interval(static_cast<int>(n)) : SpaceSpec::square(static_cast<int>(n));
  }
  if (kind == "gasket" || kind == "carpet") {
    reject_unknown(s, {"kind", "level"}, "space");
    if (!s.contains("level")) fail("space.level is required for " + kind);
    const long long m = get_integer(s, "level", "space");
    const long long hi = kind == "gasket" ? 9 : 5;
    if (m < 1 || m > hi) fail("space.level must be in [1, " + std::to_string(hi) + "]");
    return kind == "gasket" ? SpaceSpec::gasket(static_cast<int>(m)) : SpaceSpec::carpet(static_cast<int>(m));
  }
  if (kind == "file") {
    reject_unknown(s, {"kind", "path"}, "space");
    if (!s.contains("path") || !s["path"].is_string()) fail("space.path must be a string");
    return SpaceSpec::file(s["path"].get<std::string>());
  }
  fail("space.kind must be one of interval_grid, square_grid, gasket, carpet, file");
}

GridConfig parse_grid(const json& g) {
  if (!g.is_object()) fail("grid must be an object");
  reject_unknown(g, {"r_max", "ratio", "count", "window", "kappa", "snap"}, "grid");
  GridConfig out;
  if (g.contains("r_max")) {
    out.r_max = get_number(g, "r_max", "grid");
    if (!(*out.r_max > 0.0)) fail("grid.r_max must be positive");
  }
  if (g.contains("ratio")) {
    out.ratio = get_number(g, "ratio", "grid");
    if (!(out.ratio > 0.0 && out.ratio < 1.0)) fail("grid.ratio must be in (0, 1)");
  }
  if (g.contains("count")) {
    const long long c = get_integer(g, "count", "grid");
    if (c < 1 || c > 64) fail("grid.count must be in [1, 64]");
    out.count = static_cast<int>(c);
  }
  if (g.contains("window")) {
    const long long w = get_integer(g, "window", "grid");
    if (w < 1 || w > 64) fail("grid.window must be in [1, 64]");
    out.window = static_cast<int>(w);
  }
  if (g.contains("kappa")) {
    out.kappa = get_number(g, "kappa", "grid");
    if (out.kappa < kAdmissibility) fail("grid.kappa must be at least 3");
  }
  if (g.contains("snap")) {
    if (!g["snap"].is_boolean()) fail("grid.snap must be a boolean");
    out.snap = g["snap"].get<bool>();
  }
  return out;
}

}  // namespace

void set_suites(ExperimentConfig& cfg, const std::string& list) {
  std::set<std::string> chosen;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "all") {
      chosen.insert(kSuites.begin(), kSuites.end());
    } else if (std::find(kSuites.begin(), kSuites.end(), item) != kSuites.end()) {
      chosen.insert(item);
    } else {
      fail("unknown suite '" + item + "'");
    }
  }
  if (chosen.empty()) fail("suite selection is empty");
  cfg.suites.clear();
  for (const auto& s : kSuites) {
    if (chosen.count(s)) cfg.suites.push_back(s);
  }
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) fail("configuration must be a JSON object");
  reject_unknown(doc, {"space", "d_w", "grid", "seed", "suite", "output", "fields", "samples", "tolerances"},
                 "configuration");
  ExperimentConfig cfg;
  if (!doc.contains("space")) fail("space is required");
  cfg.space = parse_space(doc["space"]);

  if (!doc.contains("seed")) fail("seed is required");
  if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0)) {
    fail("seed must be a nonnegative integer");
  }
  cfg.seed = doc["seed"].get<std::uint64_t>();

  const bool grid_space = cfg.space.kind == SpaceKind::interval_grid || cfg.space.kind == SpaceKind::square_grid;
  if (doc.contains("d_w")) {
    const json& d = doc["d_w"];
    if (d.is_string()) {
      if (d.get<std::string>() != "fit") fail("d_w must be a number >= 2 or \"fit\"");
    } else if (d.is_number()) {
      const double v = d.get<double>();
      if (!(v >= 2.0) || !std::isfinite(v)) fail("d_w must be >= 2");
      cfg.d_w = v;
    } else {
      fail("d_w must be a number >= 2 or \"fit\"");
    }
  } else if (grid_space || cfg.space.kind == SpaceKind::file) {
    cfg.d_w = 2.0;
  }

  if (doc.contains("grid")) cfg.grid = parse_grid(doc["grid"]);

  if (doc.contains("suite")) {
    const json& s = doc["suite"];
    std::string list;
    if (s.is_string()) {
      list = s.get<std::string>();
    } else if (s.is_array()) {
      for (const auto& e : s) {
        if (!e.is_string()) fail("suite entries must be strings");
        list += (list.empty() ? "" : ",") + e.get<std::string>();
      }
    } else {
      fail("suite must be a string or a list of strings");
    }
    set_suites(cfg, list);
  } else {
    set_suites(cfg, "all");
  }

  if (doc.contains("output")) {
    if (!doc["output"].is_string() || doc["output"].get<std::string>().empty()) fail("output must be a nonempty string");
    cfg.output = doc["output"].get<std::string>();
  }

  if (doc.contains("fields")) {
    if (!doc["fields"].is_array() || doc["fields"].empty()) fail("fields must be a nonempty list");
    for (const auto& f : doc["fields"]) {
      if (!f.is_string()) fail("fields entries must be strings");
      const std::string name = f.get<std::string>();
      if (std::find(known_fields().begin(), known_fields().end(), name) == known_fields().end()) {
        fail("unknown field '" + name + "'");
      }
      cfg.fields.push_back(name);
    }
  }

  if (doc.contains("samples")) {
    const json& s = doc["samples"];
    if (!s.is_object()) fail("samples must be an object");
    reject_unknown(s, {"doubling_centers", "poincare_centers", "lambda"}, "samples");
    if (s.contains("doubling_centers")) {
      const long long n = get_integer(s, "doubling_centers", "samples");
      if (n < 1 || n > 100000) fail("samples.doubling_centers must be in [1, 100000]");
      cfg.doubling_centers = static_cast<std::size_t>(n);
    }
    if (s.contains("poincare_centers")) {
      const long long n = get_integer(s, "poincare_centers", "samples");
      if (n < 1 || n > 100000) fail("samples.poincare_centers must be in [1, 100000]");
      cfg.poincare_centers = static_cast<std::size_t>(n);
    }
    if (s.contains("lambda")) {
      cfg.lambda = get_number(s, "lambda", "samples");
      if (cfg.lambda < 1.0) fail("samples.lambda must be >= 1");
    }
  }

  cfg.tolerances = default_tolerances();
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    if (!t.is_object()) fail("tolerances must be an object");
    for (const auto& [k, v] : t.items()) {
      if (!cfg.tolerances.count(k)) fail("unknown tolerance '" + k + "'");
      if (!v.is_number() || !(v.get<double>() > 0.0)) fail("tolerance '" + k + "' must be a positive number");
      cfg.tolerances[k] = v.get<double>();
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open configuration file " + path);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);  // comments allowed
  } catch (const json::parse_error& e) {
    fail(std::string("configuration is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["space"] = space.describe();
  if (d_w) {
    j["d_w"] = *d_w;
  } else {
    j["d_w"] = "fit";
  }
  nlohmann::ordered_json g;
  if (grid.r_max) {
    g["r_max"] = *grid.r_max;
  } else {
    g["r_max"] = "diam/4";
  }
  g["ratio"] = grid.ratio;
  g["count"] = grid.count;
  g["window"] = grid.window;
  g["kappa"] = grid.kappa;
  if (grid.snap) {
    g["snap"] = *grid.snap;
  } else {
    g["snap"] = "auto";
  }
  j["grid"] = g;
  j["seed"] = seed;
  j["suites"] = suites;
  j["fields"] = fields;
  j["samples"] = {{"doubling_centers", doubling_centers}, {"poincare_centers", poincare_centers}, {"lambda", lambda}};
  nlohmann::ordered_json t;
  for (const auto& [k, v] : tolerances) t[k] = v;
  j["tolerances"] = t;
  return j;
}

}  // namespace kslab::app
