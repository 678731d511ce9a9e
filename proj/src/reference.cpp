#include <cmath>

#include "kslab/energy.hpp"

namespace kslab::reference {

double ks_energy_brute(const ScalarField& f, double r, double d_w, const Region& region) {
  const MeasuredPointCloud& cloud = f.cloud();
  const std::size_t n = cloud.size();
  std::vector<PointId> centers;
  if (region.is_all()) {
    centers.resize(n);
    for (std::size_t i = 0; i < n; ++i) centers[i] = static_cast<PointId>(i);
  } else {
    centers.assign(region.ids().begin(), region.ids().end());
  }
  const double rpow = std::pow(r, d_w);
  double total = 0.0;
  for (PointId x : centers) {
    double mass = 0.0, acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto y = static_cast<PointId>(j);
      if (!(cloud.distance(x, y) < r)) continue;
      const double d = f[x] - f[y];
      mass += cloud.weight(y);
      acc += cloud.weight(y) * d * d;
    }
    total += cloud.weight(x) * (acc / mass) / rpow;
  }
  return total;
}

}  // namespace kslab::reference
