#include "bundle.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace kslab::app {

using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kSchema = "kslab-bundle/1";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string kind_name(SpaceKind k) {
  switch (k) {
    case SpaceKind::interval_grid: return "interval_grid";
    case SpaceKind::square_grid: return "square_grid";
    case SpaceKind::gasket: return "gasket";
    case SpaceKind::carpet: return "carpet";
    case SpaceKind::file: return "file";
  }
  return "unknown";
}

// First numeric entry of a check's values, used as the headline constant in reports.
std::string headline(const ojson& check) {
  const ojson values = check.value("values", ojson::object());
  const std::string key = check.value("constant", "");
  if (!key.empty() && values.contains(key) && values[key].is_number()) {
    std::ostringstream os;
    os << key << " = " << std::setprecision(6) << values[key].get<double>();
    return os.str();
  }
  for (const auto& [k, v] : values.items()) {
    if (v.is_number()) {
      std::ostringstream os;
      os << k << " = " << std::setprecision(6) << v.get<double>();
      return os.str();
    }
  }
  return "-";
}

}  // namespace

ojson describe_space(const MeasuredPointCloud& cloud) {
  ojson j;
  j["kind"] = kind_name(cloud.spec().kind);
  j["spec"] = cloud.spec().describe();
  j["points"] = cloud.size();
  j["mode"] = cloud.euclidean() ? "coords" : "matrix";
  j["dim"] = cloud.dim();
  j["mesh"] = cloud.mesh();
  j["kappa"] = kAdmissibility;
  j["admissible_floor"] = cloud.admissible_floor();
  j["diameter"] = cloud.diameter();
  j["total_mass"] = cloud.total_mass();
  if (cloud.spec().kind == SpaceKind::gasket) j["measure"] = "uniform over vertices";
  return j;
}

bool Bundle::passed() const {
  for (const auto& c : checks) {
    if (c.status == "fail") return false;
  }
  return true;
}

ojson Bundle::summary() const {
  ojson j;
  j["schema"] = kSchema;
  j["command"] = command;
  j["config"] = config;
  j["space"] = space;
  j["d_w"] = d_w;
  ojson list = ojson::array();
  std::size_t n_pass = 0, n_fail = 0, n_skip = 0;
  for (const auto& c : checks) {
    ojson e;
    e["id"] = c.id;
    e["suite"] = c.suite;
    e["topic"] = c.topic;
    e["status"] = c.status;
    e["note"] = c.note;
    if (!c.constant.empty()) e["constant"] = c.constant;
    e["values"] = c.values;
    ojson files = ojson::array();
    for (const auto& t : c.tables) files.push_back(t.name + ".csv");
    e["files"] = files;
    list.push_back(std::move(e));
    n_pass += c.status == "pass";
    n_fail += c.status == "fail";
    n_skip += c.status == "skip";
  }
  j["checks"] = list;
  j["totals"] = {{"pass", n_pass}, {"fail", n_fail}, {"skip", n_skip}};
  j["status"] = passed() ? "pass" : "fail";
  return j;
}

void write_table(const Table& t, std::ostream& out) {
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt(row[i]);
    out << '\n';
  }
}

void write_bundle(const Bundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  std::set<std::string> seen;
  const auto emit = [&](const Table& t) {
    if (!seen.insert(t.name).second) throw std::logic_error("duplicate table name " + t.name);
    auto f = open(t.name + ".csv");
    write_table(t, f);
  };
  for (const auto& t : b.extra_tables) emit(t);
  for (const auto& c : b.checks) {
    for (const auto& t : c.tables) emit(t);
  }
  {
    auto f = open("checks.csv");
    f << "id,suite,status,note\n";
    for (const auto& c : b.checks) {
      f << csv_escape(c.id) << ',' << c.suite << ',' << c.status << ',' << csv_escape(c.note) << '\n';
    }
  }
  auto f = open("summary.json");
  f << b.summary().dump(2) << '\n';
}

bool print_report(const std::filesystem::path& dir, std::ostream& out) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("no bundle at " + dir.string());
  const auto path = dir / "summary.json";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("bundle " + dir.string() + " has no summary.json");
  ojson j;
  try {
    j = ojson::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error("unreadable summary: " + std::string(e.what()));
  }
  if (!j.is_object() || j.value("schema", "") != kSchema || !j.contains("checks") || !j["checks"].is_array()) {
    throw std::runtime_error(path.string() + " is not a kslab summary");
  }
  if (j["checks"].empty()) throw std::runtime_error("bundle " + dir.string() + " holds no checks");

  std::size_t w_id = 5, w_topic = 5, w_value = 8;
  std::vector<std::array<std::string, 4>> rows;
  for (const auto& c : j["checks"]) {
    rows.push_back({c.value("id", "?"), c.value("topic", ""), headline(c),
                    c.value("status", "?")});
    w_id = std::max(w_id, rows.back()[0].size());
    w_topic = std::max(w_topic, rows.back()[1].size());
    w_value = std::max(w_value, rows.back()[2].size());
  }
  out << "space: " << j["space"].value("spec", "?") << "   d_w: ";
  if (j["d_w"].contains("value")) out << j["d_w"]["value"].get<double>() << " (" << j["d_w"].value("source", "?") << ")";
  out << "\n\n";
  out << std::left << std::setw(static_cast<int>(w_id)) << "check" << "  " << std::setw(static_cast<int>(w_topic))
      << "topic" << "  " << std::setw(static_cast<int>(w_value)) << "constant" << "  status\n";
  out << std::string(w_id + w_topic + w_value + 12, '-') << '\n';
  bool ok = true;
  for (const auto& r : rows) {
    out << std::setw(static_cast<int>(w_id)) << r[0] << "  " << std::setw(static_cast<int>(w_topic)) << r[1] << "  "
        << std::setw(static_cast<int>(w_value)) << r[2] << "  " << r[3] << '\n';
    ok = ok && r[3] != "fail";
  }
  const auto& t = j["totals"];
  out << "\n" << t.value("pass", 0) << " pass, " << t.value("fail", 0) << " fail, " << t.value("skip", 0) << " skip\n";
  return ok;
}

}  // namespace kslab::app
