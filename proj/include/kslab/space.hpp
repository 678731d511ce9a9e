#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kslab {

using PointId = std::uint32_t;

/// Scales below kAdmissibility * mesh are treated as discretization noise.
inline constexpr double kAdmissibility = 3.0;

/// Thrown whenever a scale, radius or net spacing falls below the admissible floor.
class InadmissibleScale : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class SpaceKind { interval_grid, square_grid, gasket, carpet, file };

/// Descriptor of a built-in space or an imported one.
struct SpaceSpec {
  SpaceKind kind = SpaceKind::interval_grid;
  int size = 0;      // points per side for grids, level for fractals
  std::string path;  // only for SpaceKind::file

  static SpaceSpec interval(int n) { return {SpaceKind::interval_grid, n, {}}; }
  static SpaceSpec square(int n) { return {SpaceKind::square_grid, n, {}}; }
  static SpaceSpec gasket(int level) { return {SpaceKind::gasket, level, {}}; }
  static SpaceSpec carpet(int level) { return {SpaceKind::carpet, level, {}}; }
  static SpaceSpec file(std::string p) { return {SpaceKind::file, 0, std::move(p)}; }

  std::string describe() const;
};

class BallIndex;

struct Ball {
  PointId center = 0;
  double radius = 0.0;
  std::vector<PointId> members;  // sorted ids, open ball d(x,y) < r
  double mass = 0.0;
};

/// Finite weighted point set standing in for a compact metric measure space.
///
/// Two storage modes exist: Euclidean coordinates (with a uniform-bucket index
/// for ball queries) and an explicit symmetric distance matrix. Instances are
/// immutable after construction and safe to share across threads.
class MeasuredPointCloud {
 public:
  /// Euclidean mode. `coords` is row-major n x dim.
  MeasuredPointCloud(std::size_t dim, std::vector<double> coords, std::vector<double> weights,
                     double mesh, SpaceSpec spec);
  MeasuredPointCloud(std::size_t dim, std::vector<double> coords, std::vector<double> weights,
                     SpaceSpec spec);

  /// Abstract mode. `distances` is row-major n x n. Validates symmetry and a sampled
  /// triangle inequality (`triangle_checks` random triples).
  static MeasuredPointCloud from_distance_matrix(std::vector<double> distances,
                                                 std::vector<double> weights, SpaceSpec spec,
                                                 std::size_t triangle_checks = 10000,
                                                 std::uint64_t seed = 1);

  MeasuredPointCloud(const MeasuredPointCloud&) = delete;
  MeasuredPointCloud& operator=(const MeasuredPointCloud&) = delete;
  MeasuredPointCloud(MeasuredPointCloud&&) noexcept;
  MeasuredPointCloud& operator=(MeasuredPointCloud&&) noexcept;
  ~MeasuredPointCloud();

  std::size_t size() const { return weights_.size(); }
  bool euclidean() const { return dim_ > 0; }
  std::size_t dim() const { return dim_; }
  const SpaceSpec& spec() const { return spec_; }

  std::span<const double> coords(PointId i) const { return {coords_.data() + i * dim_, dim_}; }
  double coord(PointId i, std::size_t axis) const { return coords_[i * dim_ + axis]; }

  double weight(PointId i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }
  double total_mass() const { return total_mass_; }

  /// Maximal nearest-neighbour distance (or the construction spacing for built-ins).
  double mesh() const { return mesh_; }
  double admissible_floor() const { return kAdmissibility * mesh_; }
  double diameter() const { return diameter_; }

  double distance(PointId a, PointId b) const;

  /// Indexed open-ball query. `out` is cleared and filled with ids, sorted unless
  /// `sorted` is false (bucket order, still deterministic).
  void ball_members(PointId x, double r, std::vector<PointId>& out, bool sorted = true) const;
  /// O(n) scan, kept as the reference for the index.
  void ball_members_brute(PointId x, double r, std::vector<PointId>& out) const;

  Ball ball(PointId x, double r) const;
  double ball_mass(PointId x, double r) const;

  /// Checks `count` random triples for the triangle inequality; returns the number of violations.
  std::size_t triangle_violations(std::size_t count, std::uint64_t seed) const;

 private:
  MeasuredPointCloud() = default;
  void finalize(std::optional<double> mesh);

  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> distances_;
  std::vector<double> weights_;
  double total_mass_ = 0.0;
  double mesh_ = 0.0;
  double diameter_ = 0.0;
  SpaceSpec spec_;
  std::unique_ptr<BallIndex> index_;
};

MeasuredPointCloud build_cloud(const SpaceSpec& spec);

/// f_B: mu-weighted mean of `values` over the ball.
double ball_average(const MeasuredPointCloud& cloud, std::span<const double> values, const Ball& b);

struct DoublingSample {
  PointId center;
  double r;
  double mass_r;
  double mass_2r;
  double ratio;
};

struct DoublingProfile {
  std::vector<DoublingSample> samples;
  double doubling_constant = 1.0;  // C_D
  double q_fit = 0.0;
  double c_low = 0.0;
  std::uint64_t seed = 0;
};

/// Volume-doubling profile over `n_samples` random centers, each evaluated at every scale.
/// Scales outside [kappa*h, diam/2] are dropped; if none remain, throws InadmissibleScale.
/// `candidates` restricts center sampling (e.g. to interior points); empty means all points.
DoublingProfile estimate_doubling(const MeasuredPointCloud& cloud, std::size_t n_samples,
                                  std::span<const double> scales, std::uint64_t seed,
                                  std::span<const PointId> candidates = {});

struct MassBoundReport {
  bool holds = false;
  double worst_c = 0.0;
};

/// Lower mass bound mu(B(x,r)) >= c r^Q over the profile samples; worst_c is the largest feasible c.
MassBoundReport check_mass_bounds(const DoublingProfile& profile, double q);

/// Points whose distance to the bounding box boundary is at least `margin` (Euclidean clouds only).
std::vector<PointId> interior_points(const MeasuredPointCloud& cloud, double margin);

/// Vertex set and level-m cells of the Sierpinski gasket graph approximation, in lattice
/// coordinates (a, b) with position a*(1,0)/2^m + b*(1/2, sqrt(3)/2)/2^m. The three outer
/// corners come first; the rest are ordered by (b, a).
struct GasketLattice {
  int level = 0;
  std::vector<std::array<int, 2>> vertices;
  std::vector<std::array<PointId, 3>> cells;
};

GasketLattice gasket_lattice(int level);

}  // namespace kslab
