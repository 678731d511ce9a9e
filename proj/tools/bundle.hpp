#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "suites.hpp"

namespace kslab::app {

/// Everything one invocation produces. Timings are left out on purpose so that the summary
/// is a pure function of the configuration.
struct Bundle {
  std::string command;
  nlohmann::ordered_json config;
  nlohmann::ordered_json space;
  nlohmann::ordered_json d_w;
  std::vector<CheckResult> checks;
  std::vector<Table> extra_tables;  // tables not owned by a check (cloud export, ...)

  bool passed() const;
  nlohmann::ordered_json summary() const;
};

nlohmann::ordered_json describe_space(const MeasuredPointCloud& cloud);

/// Writes <dir>/summary.json, <dir>/checks.csv and one CSV per table. Creates `dir`.
void write_bundle(const Bundle& b, const std::filesystem::path& dir);

void write_table(const Table& t, std::ostream& out);

/// Prints one row per check of a bundle summary. Throws std::runtime_error when the directory
/// or its summary is missing or unreadable. Returns true when every check passed or was skipped.
bool print_report(const std::filesystem::path& dir, std::ostream& out);

}  // namespace kslab::app
