#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "kslab/space.hpp"

namespace kslab {

/// A function f: X -> R sampled on a cloud. The cloud must outlive the field.
class ScalarField {
 public:
  ScalarField(const MeasuredPointCloud& cloud, std::vector<double> values);

  static ScalarField constant(const MeasuredPointCloud& cloud, double c);
  static ScalarField from_coords(const MeasuredPointCloud& cloud,
                                 const std::function<double(std::span<const double>)>& fn);

  const MeasuredPointCloud& cloud() const { return *cloud_; }
  std::span<const double> values() const { return values_; }
  double operator[](PointId i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  /// (sum_i mu_i f_i^2)^{1/2}
  double l2_norm() const { return std::sqrt(l2_norm_squared()); }
  double l2_norm_squared() const;
  double sup_norm() const;
  /// sum_i mu_i f_i g_i
  double inner(const ScalarField& other) const;
  bool is_constant(double tol = 0.0) const;

  ScalarField operator+(const ScalarField& o) const;
  ScalarField operator-(const ScalarField& o) const;
  ScalarField operator*(double s) const;
  ScalarField shifted(double c) const;

 private:
  const MeasuredPointCloud* cloud_;
  std::vector<double> values_;
};

/// A subset U of the cloud; `all()` denotes the whole space.
class Region {
 public:
  static Region all() { return Region(); }
  static Region of(std::vector<PointId> ids);
  static Region ball(const MeasuredPointCloud& cloud, PointId x, double r);

  bool is_all() const { return all_; }
  std::span<const PointId> ids() const { return ids_; }

 private:
  bool all_ = true;
  std::vector<PointId> ids_;
};

/// Descending geometric scale grid r_k = r_max * ratio^k, k = 0..count-1.
struct ScaleGrid {
  double r_max = 0.25;
  double ratio = 0.70710678118654752;  // 2^{-1/2}
  int count = 12;
  /// Move each admissible scale to the nearest (k + 1/2) h, midway between lattice distance
  /// shells, so that ball membership does not jump at the chosen radii. Only meaningful on
  /// 1D grids, where every distance is a multiple of h.
  bool snap = false;

  /// Defaults: r_max = diam/4, ratio 2^{-1/2}, 12 scales, snapping on 1D Euclidean clouds.
  static ScaleGrid standard(const MeasuredPointCloud& cloud);

  std::vector<double> scales() const;
  /// Scales that are >= the cloud's admissible floor (then snapped), still descending.
  std::vector<double> admissible(const MeasuredPointCloud& cloud) const;
};

void require_same_cloud(const ScalarField& f, const MeasuredPointCloud& cloud, const char* where);

}  // namespace kslab
