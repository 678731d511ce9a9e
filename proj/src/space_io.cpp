#include <fstream>
#include <iomanip>
#include <sstream>

#include "kslab/io.hpp"

namespace kslab {

namespace {

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto p = line.find_first_not_of(" \t\r");
    if (p == std::string::npos || line[p] == '#') continue;
    return true;
  }
  return false;
}

std::vector<double> parse_numbers(const std::string& line, std::size_t expected, std::size_t lineno) {
  std::istringstream is(line);
  std::vector<double> v;
  double x;
  while (is >> x) v.push_back(x);
  if (!is.eof() || v.size() != expected) {
    throw std::runtime_error("cloud file: point line " + std::to_string(lineno) + " should hold " +
                             std::to_string(expected) + " numbers");
  }
  return v;
}

}  // namespace

MeasuredPointCloud read_cloud(std::istream& in, SpaceSpec spec) {
  std::string line;
  if (!next_data_line(in, line)) throw std::runtime_error("cloud file: missing header");
  std::istringstream hs(line);
  long n = 0;
  std::string mode;
  if (!(hs >> n >> mode) || n <= 0) throw std::runtime_error("cloud file: bad header '" + line + "'");

  std::vector<double> weights(static_cast<std::size_t>(n));
  if (mode == "coords") {
    long dim = 0;
    if (!(hs >> dim) || dim <= 0) throw std::runtime_error("cloud file: coords header needs a dimension");
    std::vector<double> coords;
    coords.reserve(static_cast<std::size_t>(n * dim));
    for (long i = 0; i < n; ++i) {
      if (!next_data_line(in, line)) throw std::runtime_error("cloud file: truncated point list");
      auto v = parse_numbers(line, static_cast<std::size_t>(dim) + 1, static_cast<std::size_t>(i));
      coords.insert(coords.end(), v.begin(), v.end() - 1);
      weights[static_cast<std::size_t>(i)] = v.back();
    }
    return MeasuredPointCloud(static_cast<std::size_t>(dim), std::move(coords), std::move(weights),
                              std::move(spec));
  }
  if (mode == "matrix") {
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n * n));
    for (long i = 0; i < n; ++i) {
      if (!next_data_line(in, line)) throw std::runtime_error("cloud file: truncated distance matrix");
      auto v = parse_numbers(line, static_cast<std::size_t>(n) + 1, static_cast<std::size_t>(i));
      dist.insert(dist.end(), v.begin(), v.end() - 1);
      weights[static_cast<std::size_t>(i)] = v.back();
    }
    return MeasuredPointCloud::from_distance_matrix(std::move(dist), std::move(weights), std::move(spec));
  }
  throw std::runtime_error("cloud file: unknown mode '" + mode + "'");
}

MeasuredPointCloud load_cloud_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cloud file '" + path + "'");
  return read_cloud(in, SpaceSpec::file(path));
}

void write_cloud_csv(const MeasuredPointCloud& cloud, std::ostream& out) {
  out << std::setprecision(17);
  out << "id";
  for (std::size_t a = 0; a < cloud.dim(); ++a) out << ",x" << a;
  out << ",weight\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto id = static_cast<PointId>(i);
    out << i;
    for (std::size_t a = 0; a < cloud.dim(); ++a) out << ',' << cloud.coord(id, a);
    out << ',' << cloud.weight(id) << '\n';
  }
}

void write_doubling_csv(const DoublingProfile& profile, std::ostream& out) {
  out << std::setprecision(17) << "center,r,mass_r,mass_2r,ratio\n";
  for (const auto& s : profile.samples) {
    out << s.center << ',' << s.r << ',' << s.mass_r << ',' << s.mass_2r << ',' << s.ratio << '\n';
  }
}

void write_cloud_text(const MeasuredPointCloud& cloud, std::ostream& out) {
  out << std::setprecision(17);
  const std::size_t n = cloud.size();
  if (cloud.euclidean()) {
    out << n << " coords " << cloud.dim() << '\n';
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < cloud.dim(); ++a) out << cloud.coord(static_cast<PointId>(i), a) << ' ';
      out << cloud.weight(static_cast<PointId>(i)) << '\n';
    }
  } else {
    out << n << " matrix\n";
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        out << cloud.distance(static_cast<PointId>(i), static_cast<PointId>(j)) << ' ';
      }
      out << cloud.weight(static_cast<PointId>(i)) << '\n';
    }
  }
}

}  // namespace kslab
