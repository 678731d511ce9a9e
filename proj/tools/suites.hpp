#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "kslab/energy.hpp"
#include "kslab/graphform.hpp"

namespace kslab::app {

struct Table {
  std::string name;  // file stem, written as <name>.csv
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct CheckResult {
  std::string id;     // "<suite>.<check>[.<field>]"
  std::string suite;
  std::string topic;  // the property being checked
  std::string status = "pass";  // pass | fail | skip
  std::string note;
  std::string constant;  // key in `values` shown by `report`; empty means the first number
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  std::vector<Table> tables;

  void require(bool ok, const std::string& what);
  void skip(const std::string& why);
};

struct NamedField {
  std::string name;
  ScalarField field;
};

/// Shared, lazily built state for one experiment: clouds, forms, spectra and d_w.
class Context {
 public:
  explicit Context(const ExperimentConfig& cfg);
  ~Context();

  const ExperimentConfig& config() const { return cfg_; }
  const MeasuredPointCloud& cloud() const { return *cloud_; }
  /// The same space one dyadic step coarser (grids: (n+1)/2 points per side, gasket: level-1),
  /// or nullptr when there is none.
  const MeasuredPointCloud* coarse();
  std::optional<FormKind> form_kind() const;
  const GraphDirichletForm* form();
  const GraphDirichletForm* coarse_form();
  /// Full spectrum for n <= 5000, otherwise the 60 lowest pairs.
  const Spectrum* spectrum();

  ScaleGrid grid(const MeasuredPointCloud& c) const;
  std::vector<NamedField> fields(const MeasuredPointCloud& c);

  double d_w() const { return d_w_; }
  const nlohmann::ordered_json& d_w_info() const { return d_w_info_; }

 private:
  void resolve_d_w();
  ScalarField make_field(const std::string& name, const MeasuredPointCloud& c, const Spectrum* spec);

  const ExperimentConfig& cfg_;
  std::unique_ptr<MeasuredPointCloud> cloud_;
  std::unique_ptr<MeasuredPointCloud> coarse_;
  bool coarse_tried_ = false;
  std::unique_ptr<GraphDirichletForm> form_;
  std::unique_ptr<GraphDirichletForm> coarse_form_;
  std::unique_ptr<Spectrum> spectrum_;
  std::unique_ptr<Spectrum> coarse_spectrum_;
  double d_w_ = 2.0;
  nlohmann::ordered_json d_w_info_;
};

/// Field names used when the configuration does not list any.
std::vector<std::string> default_fields(const SpaceSpec& space);

/// Throws ConfigError when a configured field cannot live on the configured space or the
/// scale grid leaves nothing admissible. Builds the cloud, so it doubles as the space check.
void validate_against_space(const ExperimentConfig& cfg);

std::vector<CheckResult> run_suite(const std::string& suite, Context& ctx);

}  // namespace kslab::app
