// kslab: command-line driver. See docs/config.md for the configuration format.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bundle.hpp"
#include "config.hpp"
#include "suites.hpp"

namespace {

using namespace kslab;
using namespace kslab::app;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string suite;
  std::string out;
};

// Everything that can reject the configuration happens here, before any output exists.
ExperimentConfig prepare(const Flags& f, bool suite_required) {
  ExperimentConfig cfg = load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.suite.empty()) {
    set_suites(cfg, f.suite);
  } else if (suite_required) {
    throw ConfigError("check needs --suite");
  }
  if (!f.out.empty()) cfg.output = f.out;
  validate_against_space(cfg);
  return cfg;
}

Table cloud_table(const MeasuredPointCloud& c) {
  Table t{"cloud", {"id"}, {}};
  for (std::size_t a = 0; a < c.dim(); ++a) t.header.push_back("x" + std::to_string(a));
  t.header.push_back("weight");
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::vector<double> row{static_cast<double>(i)};
    for (std::size_t a = 0; a < c.dim(); ++a) row.push_back(c.coord(static_cast<PointId>(i), a));
    row.push_back(c.weight(static_cast<PointId>(i)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

int execute(const std::string& command, const Flags& flags) {
  ExperimentConfig cfg;
  std::unique_ptr<Context> ctx;
  try {
    cfg = prepare(flags, command == "check");
    ctx = std::make_unique<Context>(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "kslab: invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  }

  Bundle b;
  b.command = command;
  b.config = cfg.to_json();
  b.space = describe_space(ctx->cloud());
  b.d_w = ctx->d_w_info();

  if (command == "space") {
    b.extra_tables.push_back(cloud_table(ctx->cloud()));
    b.checks = run_suite("doubling", *ctx);
  } else if (command == "sweep") {
    for (auto& c : run_suite("energy", *ctx)) {
      if (c.id.rfind("energy.sweep.", 0) == 0) b.checks.push_back(std::move(c));
    }
  } else {
    for (const auto& s : cfg.suites) {
      const auto t0 = std::chrono::steady_clock::now();
      for (auto& c : run_suite(s, *ctx)) b.checks.push_back(std::move(c));
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      std::cerr << "kslab: " << s << " done in " << dt.count() << " s\n";
    }
  }

  write_bundle(b, cfg.output);
  std::size_t failed = 0;
  for (const auto& c : b.checks) {
    if (c.status == "fail") {
      ++failed;
      std::cerr << "kslab: FAIL " << c.id << ": " << c.note << '\n';
    }
  }
  std::cout << b.checks.size() << " checks, " << failed << " failed; bundle in " << cfg.output << '\n';
  return b.passed() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kslab: multiscale energies on metric measure spaces"};
  app.require_subcommand(1);
  Flags flags;

  const auto add_common = [&](CLI::App* sub, bool with_suite) {
    sub->add_option("--config", flags.config, "configuration file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "override the configured seed");
    if (with_suite) sub->add_option("--suite", flags.suite, "comma-separated suites, or all");
    sub->add_option("--out", flags.out, "bundle directory (overrides the configured output)");
  };
  CLI::App* space = app.add_subcommand("space", "build the space, export it and profile volume doubling");
  add_common(space, false);
  CLI::App* sweep = app.add_subcommand("sweep", "energy sweeps of the configured fields");
  add_common(sweep, false);
  CLI::App* check = app.add_subcommand("check", "run the suites named by --suite");
  add_common(check, true);
  CLI::App* run = app.add_subcommand("run", "run the configured suites");
  add_common(run, true);
  CLI::App* report = app.add_subcommand("report", "print a bundle as a table");
  std::string bundle_dir;
  report->add_option("bundle", bundle_dir, "bundle directory");
  report->add_option("--out", flags.out, "bundle directory (same as the positional argument)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInvalid;
  }

  try {
    if (report->parsed()) {
      const std::string dir = bundle_dir.empty() ? flags.out : bundle_dir;
      if (dir.empty()) {
        std::cerr << "kslab: report needs a bundle directory\n";
        return kExitInvalid;
      }
      return print_report(dir, std::cout) ? kExitPass : kExitFail;
    }
    for (CLI::App* sub : {space, sweep, check, run}) {
      if (sub->parsed()) return execute(sub->get_name(), flags);
    }
  } catch (const std::exception& e) {
    std::cerr << "kslab: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
