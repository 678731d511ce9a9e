// Runs the kslab executable end to end. KSLAB_BIN is set by the build.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = fs::temp_directory_path() / "kslab_cli_test";

int kslab(const std::string& args, const std::string& log = "log.txt") {
  const std::string cmd = std::string(KSLAB_BIN) + " " + args + " > " + (kWork / log).string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path write_config(const std::string& name, const std::string& body) {
  fs::create_directories(kWork);
  const fs::path p = kWork / name;
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json summary(const fs::path& dir) { return json::parse(slurp(dir / "summary.json")); }

const json* find_check(const json& s, const std::string& id) {
  for (const auto& c : s["checks"]) {
    if (c["id"] == id) return &c;
  }
  return nullptr;
}

struct Fresh {
  Fresh() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};

}  // namespace

TEST_CASE_FIXTURE(Fresh, "malformed configurations exit 2 and write nothing") {
  const fs::path out = kWork / "never";
  const auto broken = write_config("broken.json", "{\"space\": {\"kind\": \"interval_grid\", \"n\": 101}, ");
  CHECK(kslab("run --config " + broken.string() + " --out " + out.string()) == 2);
  const auto unknown = write_config("unknown.json", R"({"space": {"kind": "interval_grid", "n": 101}, "seed": 1, "x": 0})");
  CHECK(kslab("run --config " + unknown.string() + " --out " + out.string()) == 2);
  const auto ok = write_config("ok.json", R"({"space": {"kind": "interval_grid", "n": 101}, "seed": 1})");
  CHECK(kslab("run --config " + ok.string() + " --suite bogus --out " + out.string()) == 2);
  CHECK(kslab("check --config " + ok.string() + " --out " + out.string()) == 2);
  CHECK(kslab("run --config " + (kWork / "missing.json").string() + " --out " + out.string()) == 2);
  CHECK(kslab("frobnicate") == 2);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE_FIXTURE(Fresh, "space on the interval passes the doubling bound") {
  const auto cfg = write_config("interval.json", R"({"space": {"kind": "interval_grid", "n": 2001}, "seed": 1})");
  const fs::path out = kWork / "space";
  REQUIRE(kslab("space --config " + cfg.string() + " --out " + out.string()) == 0);
  const json s = summary(out);
  CHECK(s["schema"] == "kslab-bundle/1");
  CHECK(s["command"] == "space");
  CHECK(s["space"]["points"] == 2001);
  const json* p = find_check(s, "doubling.profile");
  REQUIRE(p != nullptr);
  CHECK((*p)["status"] == "pass");
  CHECK((*p)["values"]["C_D"].get<double>() <= 2.1);
  CHECK(fs::exists(out / "cloud.csv"));
  CHECK(fs::exists(out / "doubling.csv"));
  CHECK(fs::exists(out / "checks.csv"));
}

TEST_CASE_FIXTURE(Fresh, "same config and seed give a byte-identical summary") {
  const auto cfg = write_config("gasket.json",
                                R"({"space": {"kind": "gasket", "level": 5}, "seed": 5,
                                    "suite": ["doubling", "energy", "smoothing"]})");
  const fs::path a = kWork / "a", b = kWork / "b", c = kWork / "c";
  const int ra = kslab("run --config " + cfg.string() + " --out " + a.string());
  const int rb = kslab("run --config " + cfg.string() + " --out " + b.string());
  CHECK(ra == rb);
  REQUIRE(fs::exists(a / "summary.json"));
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(slurp(a / "checks.csv") == slurp(b / "checks.csv"));
  // a different seed changes the sampled centres
  kslab("run --config " + cfg.string() + " --seed 6 --out " + c.string());
  CHECK(summary(c)["config"]["seed"] == 6);
  CHECK(slurp(a / "summary.json") != slurp(c / "summary.json"));
}

TEST_CASE_FIXTURE(Fresh, "fitted walk dimension records both estimators") {
  const auto cfg = write_config("g5.json", R"({"space": {"kind": "gasket", "level": 5}, "seed": 1, "d_w": "fit"})");
  const fs::path out = kWork / "g5";
  const int rc = kslab("space --config " + cfg.string() + " --out " + out.string());
  CHECK(rc != 2);
  const json d = summary(out)["d_w"];
  CHECK(d["eigen_ratio"].is_number());
  CHECK(d["ks_scaling"].is_number());
  CHECK(d["agree"].is_boolean());
  CHECK(d["source"] == "eigen_ratio");
  CHECK(d["value"].get<double>() >= 2.0);
}

TEST_CASE_FIXTURE(Fresh, "sweep and report") {
  const auto cfg = write_config("sweep.json",
                                R"({"space": {"kind": "interval_grid", "n": 2001}, "seed": 1, "fields": ["x", "sin"]})");
  const fs::path out = kWork / "sweep";
  CHECK(kslab("sweep --config " + cfg.string() + " --out " + out.string()) == 0);
  const json s = summary(out);
  CHECK(s["checks"].size() == 2);
  CHECK(fs::exists(out / "sweep_x.csv"));
  CHECK(fs::exists(out / "sweep_sin.csv"));

  CHECK(kslab("report " + out.string(), "report.txt") == 0);
  const std::string text = slurp(kWork / "report.txt");
  CHECK(text.find("energy.sweep.x") != std::string::npos);
  CHECK(text.find("energy.sweep.sin") != std::string::npos);

  fs::create_directories(kWork / "empty");
  CHECK(kslab("report " + (kWork / "empty").string()) != 0);
  CHECK(kslab("report " + (kWork / "nowhere").string()) != 0);
}
