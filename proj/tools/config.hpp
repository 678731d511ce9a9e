#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kslab/space.hpp"

namespace kslab::app {

/// Raised for anything wrong with a configuration file; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string> kSuites = {"doubling", "energy",      "smoothing",
                                                 "poincare", "graphform",   "convergence"};

struct GridConfig {
  std::optional<double> r_max;  // diam/4 when absent
  double ratio = 0.70710678118654752;
  int count = 12;
  int window = 3;
  double kappa = kAdmissibility;   // >= 3; larger values drop more of the small scales
  std::optional<bool> snap;        // on for 1D grids when absent
};

struct ExperimentConfig {
  SpaceSpec space;
  std::optional<double> d_w;        // empty means "fit"
  GridConfig grid;
  std::uint64_t seed = 0;
  std::vector<std::string> suites;  // expanded, registry order
  std::string output = "kslab-out";
  std::vector<std::string> fields;  // empty selects the per-space default family
  std::size_t doubling_centers = 200;
  std::size_t poincare_centers = 50;
  double lambda = 2.0;
  std::map<std::string, double> tolerances;  // defaults merged with overrides

  double tol(const std::string& name) const;
  /// Canonical echo of the configuration, used in the summary.
  nlohmann::ordered_json to_json() const;
};

/// Names and default values of every overridable tolerance.
const std::map<std::string, double>& default_tolerances();

/// Field names understood by the `fields` key.
const std::vector<std::string>& known_fields();

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Replaces the suite selection from a comma-separated list ("all" allowed).
void set_suites(ExperimentConfig& cfg, const std::string& list);

}  // namespace kslab::app
