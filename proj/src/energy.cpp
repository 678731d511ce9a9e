#include "kslab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kernels.hpp"
#include "kslab/stats.hpp"

namespace kslab {

namespace detail {

std::vector<double> density_kernel(const ScalarField& f, double r, double exponent, const Region& region) {
  const MeasuredPointCloud& cloud = f.cloud();
  const std::size_t count = region.is_all() ? cloud.size() : region.ids().size();
  const std::span<const PointId> ids = region.ids();
  const std::span<const double> v = f.values();
  const double scale = std::pow(r, -exponent);
  std::vector<double> out(count, 0.0);

#pragma omp parallel
  {
    std::vector<PointId> members;
#pragma omp for schedule(dynamic, 32)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
      const PointId x = region.is_all() ? static_cast<PointId>(i) : ids[i];
      cloud.ball_members(x, r, members, false);
      const double fx = v[x];
      double mass = 0.0, acc = 0.0;
      for (PointId y : members) {
        const double w = cloud.weight(y);
        const double d = fx - v[y];
        mass += w;
        acc += w * d * d;
      }
      out[i] = cloud.weight(x) * acc / mass * scale;
    }
  }
  return out;
}

}  // namespace detail

namespace {

void check_scale(const MeasuredPointCloud& cloud, double r, const char* where) {
  if (r < cloud.admissible_floor()) {
    throw InadmissibleScale(std::string(where) + ": scale " + std::to_string(r) +
                            " is below the admissible floor " + std::to_string(cloud.admissible_floor()));
  }
}

void check_exponent(double d_w) {
  if (!(d_w >= 2.0)) throw std::invalid_argument("walk dimension exponent must be >= 2");
}

}  // namespace

std::vector<double> energy_density(const ScalarField& f, double r, double d_w, const Region& region) {
  return detail::density_kernel(f, r, d_w, region);
}

double ks_energy(const ScalarField& f, double r, double d_w, const Region& region) {
  check_exponent(d_w);
  check_scale(f.cloud(), r, "ks_energy");
  return detail::ordered_sum(detail::density_kernel(f, r, d_w, region));
}

std::string to_string(WalkDimMethod m) {
  return m == WalkDimMethod::ks_scaling ? "ks_scaling" : "eigen_ratio";
}

EnergySweep energy_sweep(const ScalarField& f, double d_w, const Region& region, const ScaleGrid& grid,
                         int window) {
  check_exponent(d_w);
  if (window < 1) throw std::invalid_argument("energy_sweep: window must be >= 1");
  EnergySweep sw;
  sw.d_w = d_w;
  sw.region_all = region.is_all();
  sw.region_size = region.is_all() ? f.cloud().size() : region.ids().size();
  sw.scales = grid.admissible(f.cloud());
  if (sw.scales.empty()) throw InadmissibleScale("energy_sweep: no admissible scale in the grid");
  sw.values.reserve(sw.scales.size());
  for (double r : sw.scales) sw.values.push_back(detail::ordered_sum(detail::density_kernel(f, r, d_w, region)));
  sw.window = std::min<int>(window, static_cast<int>(sw.scales.size()));
  sw.field_l2_squared = f.l2_norm_squared();

  sw.sup_all = *std::max_element(sw.values.begin(), sw.values.end());
  const auto first = sw.values.end() - sw.window;
  sw.liminf_proxy = *std::min_element(first, sw.values.end());
  sw.limsup_proxy = *std::max_element(first, sw.values.end());

  const auto rfirst = sw.scales.end() - sw.window;
  std::vector<double> wr(rfirst, sw.scales.end()), we(first, sw.values.end());
  if (sw.window >= 2) {
    sw.fitted_limit = std::max(0.0, fit_line(wr, we).intercept);
    if (sw.liminf_proxy > 0.0) {
      std::vector<double> lr, le;
      for (std::size_t k = 0; k < wr.size(); ++k) {
        lr.push_back(std::log(wr[k]));
        le.push_back(std::log(we[k]));
      }
      sw.loglog_slope = fit_line(lr, le).slope;
    }
  } else {
    sw.fitted_limit = we.front();
  }
  return sw;
}

double comparability_ratio(const EnergySweep& sweep) {
  if (sweep.scales.size() < 2) {
    throw std::invalid_argument("comparability_ratio: need at least two admissible scales");
  }
  const double r_min = sweep.scales.back();
  const double floor = 1e-14 * sweep.field_l2_squared / std::pow(r_min, sweep.d_w);
  if (sweep.sup_all <= floor) return 1.0;
  return sweep.sup_all / std::max(sweep.liminf_proxy, floor);
}

WalkDimFit fit_walk_dimension(std::span<const ScalarField> fields, const ScaleGrid& grid, int window) {
  if (fields.empty()) throw std::invalid_argument("fit_walk_dimension: no fields");
  if (window < 3) throw std::invalid_argument("fit_walk_dimension: window must be >= 3");
  const MeasuredPointCloud& cloud = fields.front().cloud();
  std::vector<double> scales = grid.admissible(cloud);
  if (scales.size() > static_cast<std::size_t>(window)) scales.erase(scales.begin(), scales.end() - window);
  if (scales.size() < 3) throw InadmissibleScale("fit_walk_dimension: need >= 3 admissible scales");

  WalkDimFit fit;
  fit.method = WalkDimMethod::ks_scaling;
  fit.r_lo = scales.back();
  fit.r_hi = scales.front();
  std::vector<double> lr;
  for (double r : scales) lr.push_back(std::log(r));
  for (const ScalarField& f : fields) {
    require_same_cloud(f, cloud, "fit_walk_dimension");
    std::vector<double> ls;
    bool vanishes = false;
    for (double r : scales) {
      const double s = detail::ordered_sum(detail::density_kernel(f, r, 0.0, Region::all()));
      if (!(s > 0.0)) {
        vanishes = true;
        break;
      }
      ls.push_back(std::log(s));
    }
    if (vanishes) continue;
    fit.per_field.push_back(fit_line(lr, ls).slope);
  }
  if (fit.per_field.empty()) throw std::invalid_argument("fit_walk_dimension: all fields are constant");
  fit.d_w_hat = median(fit.per_field);
  for (double s : fit.per_field) fit.residual = std::max(fit.residual, std::abs(s - fit.d_w_hat));
  if (!(fit.d_w_hat > 0.0)) throw std::runtime_error("fit_walk_dimension: nonpositive slope");
  return fit;
}

LocalEnergyWindow::LocalEnergyWindow(const ScalarField& f, double d_w, const ScaleGrid& grid, int window)
    : d_w_(d_w) {
  check_exponent(d_w);
  std::vector<double> adm = grid.admissible(f.cloud());
  if (adm.empty()) throw InadmissibleScale("LocalEnergyWindow: no admissible scale in the grid");
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(window, 1)), adm.size());
  scales_.assign(adm.end() - static_cast<std::ptrdiff_t>(w), adm.end());
  for (double r : scales_) density_.push_back(detail::density_kernel(f, r, d_w, Region::all()));
}

double LocalEnergyWindow::region_sum(std::size_t k, const Region& region) const {
  const auto& d = density_[k];
  if (region.is_all()) return detail::ordered_sum(d);
  double s = 0.0;
  for (PointId x : region.ids()) s += d[x];
  return s;
}

double LocalEnergyWindow::liminf(const Region& region) const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < scales_.size(); ++k) m = std::min(m, region_sum(k, region));
  return m;
}

double LocalEnergyWindow::liminf(std::span<const PointId> ids) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& d : density_) {
    double s = 0.0;
    for (PointId x : ids) s += d[x];
    m = std::min(m, s);
  }
  return m;
}

double LocalEnergyWindow::limsup(const Region& region) const {
  double m = 0.0;
  for (std::size_t k = 0; k < scales_.size(); ++k) m = std::max(m, region_sum(k, region));
  return m;
}

}  // namespace kslab
