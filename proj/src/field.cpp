#include "kslab/field.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace kslab {

ScalarField::ScalarField(const MeasuredPointCloud& cloud, std::vector<double> values)
    : cloud_(&cloud), values_(std::move(values)) {
  if (values_.size() != cloud.size()) {
    throw std::invalid_argument("field has " + std::to_string(values_.size()) +
                                " values but the cloud has " + std::to_string(cloud.size()) +
                                " points");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("field values must be finite");
  }
}

ScalarField ScalarField::constant(const MeasuredPointCloud& cloud, double c) {
  return ScalarField(cloud, std::vector<double>(cloud.size(), c));
}

ScalarField ScalarField::from_coords(const MeasuredPointCloud& cloud,
                                     const std::function<double(std::span<const double>)>& fn) {
  if (!cloud.euclidean()) throw std::invalid_argument("from_coords needs a Euclidean cloud");
  std::vector<double> v(cloud.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(cloud.coords(static_cast<PointId>(i)));
  return ScalarField(cloud, std::move(v));
}

double ScalarField::l2_norm_squared() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += cloud_->weight(static_cast<PointId>(i)) * values_[i] * values_[i];
  return s;
}

double ScalarField::sup_norm() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

double ScalarField::inner(const ScalarField& other) const {
  require_same_cloud(other, *cloud_, "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    s += cloud_->weight(static_cast<PointId>(i)) * values_[i] * other.values_[i];
  }
  return s;
}

bool ScalarField::is_constant(double tol) const {
  auto [mn, mx] = std::minmax_element(values_.begin(), values_.end());
  return *mx - *mn <= tol;
}

ScalarField ScalarField::operator+(const ScalarField& o) const {
  require_same_cloud(o, *cloud_, "operator+");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.values_[i];
  return ScalarField(*cloud_, std::move(v));
}

ScalarField ScalarField::operator-(const ScalarField& o) const {
  require_same_cloud(o, *cloud_, "operator-");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.values_[i];
  return ScalarField(*cloud_, std::move(v));
}

ScalarField ScalarField::operator*(double s) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= s;
  return ScalarField(*cloud_, std::move(v));
}

ScalarField ScalarField::shifted(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x += c;
  return ScalarField(*cloud_, std::move(v));
}

Region Region::of(std::vector<PointId> ids) {
  Region r;
  r.all_ = false;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  r.ids_ = std::move(ids);
  return r;
}

Region Region::ball(const MeasuredPointCloud& cloud, PointId x, double r) {
  std::vector<PointId> ids;
  cloud.ball_members(x, r, ids);
  return of(std::move(ids));
}

ScaleGrid ScaleGrid::standard(const MeasuredPointCloud& cloud) {
  ScaleGrid g;
  g.r_max = cloud.diameter() / 4.0;
  g.snap = cloud.euclidean() && cloud.dim() == 1;
  return g;
}

std::vector<double> ScaleGrid::scales() const {
  if (!(r_max > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 1) {
    throw std::invalid_argument("scale grid needs r_max > 0, ratio in (0,1), count >= 1");
  }
  std::vector<double> r(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) r[static_cast<std::size_t>(k)] = r_max * std::pow(ratio, k);
  return r;
}

std::vector<double> ScaleGrid::admissible(const MeasuredPointCloud& cloud) const {
  std::vector<double> r = scales();
  std::erase_if(r, [&](double s) { return s < cloud.admissible_floor(); });
  if (snap) {
    const double h = cloud.mesh();
    for (double& s : r) s = (std::round(s / h - 0.5) + 0.5) * h;
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  return r;
}

void require_same_cloud(const ScalarField& f, const MeasuredPointCloud& cloud, const char* where) {
  if (&f.cloud() != &cloud) {
    throw std::invalid_argument(std::string(where) + ": field lives on a different cloud");
  }
}

}  // namespace kslab
