#include "kslab/space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "kslab/io.hpp"
#include "kslab/stats.hpp"

namespace kslab {

std::string SpaceSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case SpaceKind::interval_grid: os << "interval_grid(" << size << ")"; break;
    case SpaceKind::square_grid: os << "square_grid(" << size << ")"; break;
    case SpaceKind::gasket: os << "gasket(" << size << ")"; break;
    case SpaceKind::carpet: os << "carpet(" << size << ")"; break;
    case SpaceKind::file: os << "file(" << path << ")"; break;
  }
  return os.str();
}

// Uniform bucket grid over the bounding box. Query cost is proportional to the number of
// buckets overlapping the ball's bounding box plus the points inside them.
class BallIndex {
 public:
  BallIndex(std::size_t dim, std::span<const double> coords, std::size_t n, double mesh)
      : dim_(dim), lo_(dim, 0.0), cells_(dim, 1) {
    std::vector<double> hi(dim, 0.0);
    for (std::size_t a = 0; a < dim; ++a) {
      lo_[a] = hi[a] = coords[a];
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < dim; ++a) {
        lo_[a] = std::min(lo_[a], coords[i * dim + a]);
        hi[a] = std::max(hi[a], coords[i * dim + a]);
      }
    }
    double extent = 0.0;
    for (std::size_t a = 0; a < dim; ++a) extent = std::max(extent, hi[a] - lo_[a]);
    cell_ = std::max(2.0 * mesh, extent * 1e-9);
    if (cell_ <= 0.0) cell_ = 1.0;
    // Cap the bucket count at a small multiple of n.
    for (;;) {
      double total = 1.0;
      for (std::size_t a = 0; a < dim; ++a) {
        total *= std::floor((hi[a] - lo_[a]) / cell_) + 1.0;
      }
      if (total <= 4.0 * static_cast<double>(n) + 16.0) break;
      cell_ *= 1.5;
    }
    std::size_t total = 1;
    for (std::size_t a = 0; a < dim; ++a) {
      cells_[a] = static_cast<long>(std::floor((hi[a] - lo_[a]) / cell_)) + 1;
      total *= static_cast<std::size_t>(cells_[a]);
    }
    start_.assign(total + 1, 0);
    std::vector<std::size_t> key(n);
    for (std::size_t i = 0; i < n; ++i) {
      key[i] = flat(&coords[i * dim]);
      ++start_[key[i] + 1];
    }
    std::partial_sum(start_.begin(), start_.end(), start_.begin());
    ids_.resize(n);
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      ids_[fill[key[i]]++] = static_cast<PointId>(i);
    }
  }

  template <class Visit>
  void visit_candidates(std::span<const double> center, double r, Visit&& visit) const {
    std::vector<long> lo(dim_), hi(dim_), cur(dim_);
    for (std::size_t a = 0; a < dim_; ++a) {
      lo[a] = std::max(0L, cell_of(center[a] - r, a) - 1);
      hi[a] = std::min(cells_[a] - 1, cell_of(center[a] + r, a) + 1);
      if (lo[a] > hi[a]) return;
    }
    cur = lo;
    for (;;) {
      std::size_t f = 0;
      for (std::size_t a = dim_; a-- > 0;) f = f * static_cast<std::size_t>(cells_[a]) + cur[a];
      for (std::size_t k = start_[f]; k < start_[f + 1]; ++k) visit(ids_[k]);
      std::size_t a = 0;
      while (a < dim_ && cur[a] == hi[a]) {
        cur[a] = lo[a];
        ++a;
      }
      if (a == dim_) break;
      ++cur[a];
    }
  }

 private:
  long cell_of(double v, std::size_t a) const {
    const double c = std::floor((v - lo_[a]) / cell_);
    if (c < 0.0) return 0;
    if (c >= static_cast<double>(cells_[a])) return cells_[a] - 1;
    return static_cast<long>(c);
  }
  std::size_t flat(const double* p) const {
    std::size_t f = 0;
    for (std::size_t a = dim_; a-- > 0;) {
      f = f * static_cast<std::size_t>(cells_[a]) + static_cast<std::size_t>(cell_of(p[a], a));
    }
    return f;
  }

  std::size_t dim_;
  std::vector<double> lo_;
  std::vector<long> cells_;
  double cell_ = 1.0;
  std::vector<std::size_t> start_;
  std::vector<PointId> ids_;
};

namespace {

void validate_weights(std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("point cloud must not be empty");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("point weights must be finite and positive");
    }
  }
}

double cross(const std::array<double, 2>& o, const std::array<double, 2>& a,
             const std::array<double, 2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

}  // namespace

MeasuredPointCloud::MeasuredPointCloud(std::size_t dim, std::vector<double> coords,
                                       std::vector<double> weights, double mesh, SpaceSpec spec)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)), spec_(std::move(spec)) {
  if (!(mesh > 0.0)) throw std::invalid_argument("mesh must be positive");
  finalize(mesh);
}

MeasuredPointCloud::MeasuredPointCloud(std::size_t dim, std::vector<double> coords,
                                       std::vector<double> weights, SpaceSpec spec)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)), spec_(std::move(spec)) {
  finalize(std::nullopt);
}

MeasuredPointCloud MeasuredPointCloud::from_distance_matrix(std::vector<double> distances,
                                                            std::vector<double> weights,
                                                            SpaceSpec spec,
                                                            std::size_t triangle_checks,
                                                            std::uint64_t seed) {
  const std::size_t n = weights.size();
  if (distances.size() != n * n) {
    throw std::invalid_argument("distance matrix dimension does not match the number of points");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (distances[i * n + i] != 0.0) throw std::invalid_argument("distance matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = distances[i * n + j];
      if (a != distances[j * n + i]) throw std::invalid_argument("distance matrix is not symmetric");
      if (!(a > 0.0) || !std::isfinite(a)) {
        throw std::invalid_argument("off-diagonal distances must be finite and positive");
      }
    }
  }
  MeasuredPointCloud cloud;
  cloud.distances_ = std::move(distances);
  cloud.weights_ = std::move(weights);
  cloud.spec_ = std::move(spec);
  cloud.finalize(std::nullopt);
  if (n >= 3 && cloud.triangle_violations(triangle_checks, seed) > 0) {
    throw std::invalid_argument("distance matrix violates the triangle inequality");
  }
  return cloud;
}

MeasuredPointCloud::MeasuredPointCloud(MeasuredPointCloud&&) noexcept = default;
MeasuredPointCloud& MeasuredPointCloud::operator=(MeasuredPointCloud&&) noexcept = default;
MeasuredPointCloud::~MeasuredPointCloud() = default;

void MeasuredPointCloud::finalize(std::optional<double> mesh) {
  validate_weights(weights_);
  const std::size_t n = weights_.size();
  if (euclidean() && coords_.size() != n * dim_) {
    throw std::invalid_argument("coordinate count does not match the number of points");
  }
  for (double c : coords_) {
    if (!std::isfinite(c)) throw std::invalid_argument("coordinates must be finite");
  }
  total_mass_ = 0.0;
  for (double w : weights_) total_mass_ += w;

  if (euclidean()) {
    if (dim_ == 1) {
      auto [mn, mx] = std::minmax_element(coords_.begin(), coords_.end());
      diameter_ = *mx - *mn;
    } else if (dim_ == 2) {
      // Andrew's monotone chain; the diameter is attained between hull vertices.
      std::vector<std::array<double, 2>> p(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = {coords_[2 * i], coords_[2 * i + 1]};
      std::sort(p.begin(), p.end());
      p.erase(std::unique(p.begin(), p.end()), p.end());
      std::vector<std::array<double, 2>> hull;
      if (p.size() <= 2) {
        hull = p;
      } else {
        hull.resize(2 * p.size());
        std::size_t k = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
          while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
          hull[k++] = p[i];
        }
        for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
          while (k >= t && cross(hull[k - 2], hull[k - 1], p[i - 1]) <= 0) --k;
          hull[k++] = p[i - 1];
        }
        hull.resize(k - 1);
      }
      diameter_ = 0.0;
      for (std::size_t i = 0; i < hull.size(); ++i) {
        for (std::size_t j = i + 1; j < hull.size(); ++j) {
          diameter_ = std::max(diameter_, std::hypot(hull[i][0] - hull[j][0], hull[i][1] - hull[j][1]));
        }
      }
    } else {
      diameter_ = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          diameter_ = std::max(diameter_, distance(static_cast<PointId>(i), static_cast<PointId>(j)));
        }
      }
    }
  } else {
    diameter_ = *std::max_element(distances_.begin(), distances_.end());
  }

  if (mesh) {
    mesh_ = *mesh;
  } else {
    // Max nearest-neighbour distance, O(n^2); only used for imported clouds.
    mesh_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double nn = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) nn = std::min(nn, distance(static_cast<PointId>(i), static_cast<PointId>(j)));
      }
      if (n > 1) mesh_ = std::max(mesh_, nn);
    }
    if (!(mesh_ > 0.0)) mesh_ = std::max(diameter_, 1.0);
  }

  if (euclidean()) index_ = std::make_unique<BallIndex>(dim_, coords_, n, mesh_);
}

double MeasuredPointCloud::distance(PointId a, PointId b) const {
  if (!euclidean()) return distances_[static_cast<std::size_t>(a) * size() + b];
  const double* pa = coords_.data() + static_cast<std::size_t>(a) * dim_;
  const double* pb = coords_.data() + static_cast<std::size_t>(b) * dim_;
  double s = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    const double d = pa[k] - pb[k];
    s += d * d;
  }
  return std::sqrt(s);
}

void MeasuredPointCloud::ball_members(PointId x, double r, std::vector<PointId>& out,
                                      bool sorted) const {
  if (!index_) {
    ball_members_brute(x, r, out);
    return;
  }
  out.clear();
  index_->visit_candidates(coords(x), r, [&](PointId y) {
    if (distance(x, y) < r) out.push_back(y);
  });
  if (sorted) std::sort(out.begin(), out.end());
}

void MeasuredPointCloud::ball_members_brute(PointId x, double r, std::vector<PointId>& out) const {
  out.clear();
  for (std::size_t y = 0; y < size(); ++y) {
    if (distance(x, static_cast<PointId>(y)) < r) out.push_back(static_cast<PointId>(y));
  }
}

Ball MeasuredPointCloud::ball(PointId x, double r) const {
  if (!(r > 0.0)) throw std::invalid_argument("ball radius must be positive");
  Ball b;
  b.center = x;
  b.radius = r;
  ball_members(x, r, b.members);
  for (PointId y : b.members) b.mass += weights_[y];
  return b;
}

double MeasuredPointCloud::ball_mass(PointId x, double r) const {
  thread_local std::vector<PointId> buf;
  ball_members(x, r, buf, false);
  double m = 0.0;
  for (PointId y : buf) m += weights_[y];
  return m;
}

std::size_t MeasuredPointCloud::triangle_violations(std::size_t count, std::uint64_t seed) const {
  const std::size_t n = size();
  if (n < 3) return 0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const double tol = 1e-12 * std::max(diameter_, 1.0);
  std::size_t bad = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const auto a = static_cast<PointId>(pick(rng));
    const auto b = static_cast<PointId>(pick(rng));
    const auto c = static_cast<PointId>(pick(rng));
    if (distance(a, c) > distance(a, b) + distance(b, c) + tol) ++bad;
  }
  return bad;
}

GasketLattice gasket_lattice(int level) {
  if (level < 0 || level > 12) throw std::invalid_argument("gasket level must be in [0, 12]");
  const int side = 1 << level;
  const auto key = [side](int a, int b) { return static_cast<long>(b) * (side + 1) + a; };

  // Level-m cells in lattice units: (corner a, corner b), side 1.
  std::vector<std::array<int, 2>> corners{{0, 0}};
  for (int s = side; s > 1; s /= 2) {
    std::vector<std::array<int, 2>> next;
    next.reserve(corners.size() * 3);
    const int h = s / 2;
    for (const auto& c : corners) {
      next.push_back({c[0], c[1]});
      next.push_back({c[0] + h, c[1]});
      next.push_back({c[0], c[1] + h});
    }
    corners = std::move(next);
  }

  std::map<long, std::array<int, 2>> ordered;
  for (const auto& c : corners) {
    for (const auto& v : {std::array<int, 2>{c[0], c[1]}, std::array<int, 2>{c[0] + 1, c[1]},
                          std::array<int, 2>{c[0], c[1] + 1}}) {
      ordered.emplace(key(v[0], v[1]), v);
    }
  }
  GasketLattice lat;
  lat.level = level;
  const std::array<std::array<int, 2>, 3> outer{{{0, 0}, {side, 0}, {0, side}}};
  for (const auto& v : outer) lat.vertices.push_back(v);
  for (const auto& [k, v] : ordered) {
    if (v == outer[0] || v == outer[1] || v == outer[2]) continue;
    lat.vertices.push_back(v);
  }
  std::map<long, PointId> id_of;
  for (std::size_t i = 0; i < lat.vertices.size(); ++i) {
    id_of[key(lat.vertices[i][0], lat.vertices[i][1])] = static_cast<PointId>(i);
  }
  lat.cells.reserve(corners.size());
  for (const auto& c : corners) {
    lat.cells.push_back({id_of.at(key(c[0], c[1])), id_of.at(key(c[0] + 1, c[1])),
                         id_of.at(key(c[0], c[1] + 1))});
  }
  return lat;
}

namespace {

MeasuredPointCloud make_interval(int n) {
  if (n < 2) throw std::invalid_argument("interval_grid needs n >= 2");
  std::vector<double> x(n), w(n, 1.0 / n);
  for (int i = 0; i < n; ++i) x[i] = static_cast<double>(i) / (n - 1);
  return MeasuredPointCloud(1, std::move(x), std::move(w), 1.0 / (n - 1), SpaceSpec::interval(n));
}

MeasuredPointCloud make_square(int n) {
  if (n < 2) throw std::invalid_argument("square_grid needs n >= 2");
  const std::size_t total = static_cast<std::size_t>(n) * n;
  std::vector<double> xy(2 * total), w(total, 1.0 / static_cast<double>(total));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t id = static_cast<std::size_t>(j) * n + i;
      xy[2 * id] = static_cast<double>(i) / (n - 1);
      xy[2 * id + 1] = static_cast<double>(j) / (n - 1);
    }
  }
  return MeasuredPointCloud(2, std::move(xy), std::move(w), 1.0 / (n - 1), SpaceSpec::square(n));
}

MeasuredPointCloud make_gasket(int level) {
  if (level < 1) throw std::invalid_argument("gasket needs level >= 1");
  const GasketLattice lat = gasket_lattice(level);
  const double unit = std::ldexp(1.0, -level);
  const double s3 = std::sqrt(3.0) / 2.0;
  const std::size_t n = lat.vertices.size();
  std::vector<double> xy(2 * n), w(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double a = lat.vertices[i][0], b = lat.vertices[i][1];
    xy[2 * i] = (a + 0.5 * b) * unit;
    xy[2 * i + 1] = s3 * b * unit;
  }
  return MeasuredPointCloud(2, std::move(xy), std::move(w), unit, SpaceSpec::gasket(level));
}

MeasuredPointCloud make_carpet(int level) {
  if (level < 1) throw std::invalid_argument("carpet needs level >= 1");
  if (level > 6) throw std::invalid_argument("carpet level must be at most 6");
  int side = 1;
  for (int k = 0; k < level; ++k) side *= 3;
  const auto kept = [](int i, int j) {
    for (; i > 0 || j > 0; i /= 3, j /= 3) {
      if (i % 3 == 1 && j % 3 == 1) return false;
    }
    return true;
  };
  std::vector<double> xy;
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      if (!kept(i, j)) continue;
      xy.push_back((i + 0.5) / side);
      xy.push_back((j + 0.5) / side);
    }
  }
  const std::size_t n = xy.size() / 2;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  return MeasuredPointCloud(2, std::move(xy), std::move(w), 1.0 / side, SpaceSpec::carpet(level));
}

}  // namespace

MeasuredPointCloud build_cloud(const SpaceSpec& spec) {
  switch (spec.kind) {
    case SpaceKind::interval_grid: return make_interval(spec.size);
    case SpaceKind::square_grid: return make_square(spec.size);
    case SpaceKind::gasket: return make_gasket(spec.size);
    case SpaceKind::carpet: return make_carpet(spec.size);
    case SpaceKind::file: return load_cloud_file(spec.path);
  }
  throw std::invalid_argument("unknown space kind");
}

double ball_average(const MeasuredPointCloud& cloud, std::span<const double> values, const Ball& b) {
  double s = 0.0;
  for (PointId y : b.members) s += cloud.weight(y) * values[y];
  return s / b.mass;
}

DoublingProfile estimate_doubling(const MeasuredPointCloud& cloud, std::size_t n_samples,
                                  std::span<const double> scales, std::uint64_t seed,
                                  std::span<const PointId> candidates) {
  std::vector<double> admissible;
  for (double r : scales) {
    if (r >= cloud.admissible_floor() && r <= 0.5 * cloud.diameter()) admissible.push_back(r);
  }
  if (admissible.empty()) throw InadmissibleScale("estimate_doubling: no admissible scale");
  std::sort(admissible.begin(), admissible.end());

  std::mt19937_64 rng(seed);
  const std::size_t pool = candidates.empty() ? cloud.size() : candidates.size();
  std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
  std::vector<PointId> centers(n_samples);
  for (auto& c : centers) {
    const std::size_t k = pick(rng);
    c = candidates.empty() ? static_cast<PointId>(k) : candidates[k];
  }

  const std::size_t ns = admissible.size();
  DoublingProfile prof;
  prof.seed = seed;
  prof.samples.resize(n_samples * ns);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n_samples); ++i) {
    for (std::size_t k = 0; k < ns; ++k) {
      const double r = admissible[k];
      const double m1 = cloud.ball_mass(centers[i], r);
      const double m2 = cloud.ball_mass(centers[i], 2.0 * r);
      prof.samples[i * ns + k] = {centers[i], r, m1, m2, m2 / m1};
    }
  }

  prof.doubling_constant = 1.0;
  for (const auto& s : prof.samples) prof.doubling_constant = std::max(prof.doubling_constant, s.ratio);

  // Growth exponent: within-center regression of log mass on log r.
  if (ns >= 2) {
    std::vector<double> lx, ly;
    lx.reserve(prof.samples.size());
    ly.reserve(prof.samples.size());
    for (std::size_t i = 0; i < n_samples; ++i) {
      double mx = 0.0, my = 0.0;
      for (std::size_t k = 0; k < ns; ++k) {
        mx += std::log(prof.samples[i * ns + k].r);
        my += std::log(prof.samples[i * ns + k].mass_r);
      }
      mx /= ns;
      my /= ns;
      for (std::size_t k = 0; k < ns; ++k) {
        lx.push_back(std::log(prof.samples[i * ns + k].r) - mx);
        ly.push_back(std::log(prof.samples[i * ns + k].mass_r) - my);
      }
    }
    prof.q_fit = fit_line(lx, ly).slope;
  } else {
    double s = 0.0;
    for (const auto& smp : prof.samples) s += std::log2(smp.ratio);
    prof.q_fit = s / static_cast<double>(prof.samples.size());
  }
  if (!(prof.q_fit > 0.0)) prof.q_fit = std::numeric_limits<double>::min();
  prof.c_low = check_mass_bounds(prof, prof.q_fit).worst_c;
  return prof;
}

MassBoundReport check_mass_bounds(const DoublingProfile& profile, double q) {
  if (q < 0.0) throw std::invalid_argument("check_mass_bounds: Q must be nonnegative");
  MassBoundReport rep;
  rep.worst_c = std::numeric_limits<double>::infinity();
  for (const auto& s : profile.samples) {
    rep.worst_c = std::min(rep.worst_c, s.mass_r / std::pow(s.r, q));
  }
  if (profile.samples.empty()) rep.worst_c = 0.0;
  rep.holds = rep.worst_c > 0.0 && std::isfinite(rep.worst_c);
  return rep;
}

std::vector<PointId> interior_points(const MeasuredPointCloud& cloud, double margin) {
  if (!cloud.euclidean()) throw std::invalid_argument("interior_points needs coordinates");
  const std::size_t d = cloud.dim();
  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], cloud.coord(static_cast<PointId>(i), a));
      hi[a] = std::max(hi[a], cloud.coord(static_cast<PointId>(i), a));
    }
  }
  std::vector<PointId> out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    bool inside = true;
    for (std::size_t a = 0; a < d && inside; ++a) {
      const double c = cloud.coord(static_cast<PointId>(i), a);
      inside = c - lo[a] >= margin && hi[a] - c >= margin;
    }
    if (inside) out.push_back(static_cast<PointId>(i));
  }
  return out;
}

}  // namespace kslab
