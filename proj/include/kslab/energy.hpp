#pragma once

#include <span>
#include <string>
#include <vector>

#include "kslab/field.hpp"

namespace kslab {

/// Per-center contributions to the Korevaar-Schoen energy at scale r:
///
///     e_r(x) = mu_x / mu(B(x,r)) * sum_{y in B(x,r)} mu_y |f(x) - f(y)|^2 / r^{d_w}
///
/// evaluated for every x in U (ids order), or every point when U is all. Parallel over centers.
/// No admissibility check; `ks_energy` is the checked entry point.
std::vector<double> energy_density(const ScalarField& f, double r, double d_w,
                                   const Region& region = Region::all());

/// E_{d_w/2,U}(f, r) = sum_{x in U} e_r(x), reduced in id order. Throws InadmissibleScale when
/// r < kappa*h and std::invalid_argument when d_w < 2.
double ks_energy(const ScalarField& f, double r, double d_w, const Region& region = Region::all());

struct EnergySweep {
  double d_w = 2.0;
  bool region_all = true;
  std::size_t region_size = 0;
  std::vector<double> scales;  // admissible, descending
  std::vector<double> values;
  int window = 3;              // number of smallest scales used by the limit proxies
  double liminf_proxy = 0.0;
  double limsup_proxy = 0.0;
  double sup_all = 0.0;
  double fitted_limit = 0.0;   // intercept of E ~ L + A r over the window, clamped at 0
  double loglog_slope = 0.0;   // slope of log E vs log r over the window (0 if E vanishes)
  double field_l2_squared = 0.0;
};

/// E_k at the admissible part of `grid`. Throws InadmissibleScale when no scale survives.
EnergySweep energy_sweep(const ScalarField& f, double d_w, const Region& region,
                         const ScaleGrid& grid, int window = 3);

/// sup_all / max(liminf_proxy, floor) with floor = 1e-14 ||f||^2 / r_min^{d_w}; 1 for constants.
double comparability_ratio(const EnergySweep& sweep);

enum class WalkDimMethod { ks_scaling, eigen_ratio };

struct WalkDimFit {
  double d_w_hat = 0.0;
  WalkDimMethod method = WalkDimMethod::ks_scaling;
  double residual = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::vector<double> per_field;  // per-field slopes (ks_scaling) or per-eigenvalue estimates
};

std::string to_string(WalkDimMethod m);

/// Median over nonconstant fields of the log-log slope of the unnormalized sums
/// S(f,r) = r^{d_w} E(f,r) over the `window` smallest admissible scales of `grid` (>= 3).
/// Larger scales feel the size of the space and flatten the slope.
WalkDimFit fit_walk_dimension(std::span<const ScalarField> fields, const ScaleGrid& grid, int window = 3);

/// Densities at the `window` smallest admissible scales of a grid, so that liminf / limsup
/// proxies of E_{d_w/2,U}(f, .) can be read off for many regions U without recomputation.
class LocalEnergyWindow {
 public:
  LocalEnergyWindow(const ScalarField& f, double d_w, const ScaleGrid& grid, int window = 3);

  double liminf(const Region& region) const;
  double limsup(const Region& region) const;
  /// Same as liminf(Region::of(ids)) without building a region.
  double liminf(std::span<const PointId> ids) const;
  double d_w() const { return d_w_; }
  std::span<const double> scales() const { return scales_; }

 private:
  double region_sum(std::size_t k, const Region& region) const;

  double d_w_;
  std::vector<double> scales_;
  std::vector<std::vector<double>> density_;
};

namespace reference {

/// Serial O(n^2) double sum with explicit distances; no index, no parallelism.
double ks_energy_brute(const ScalarField& f, double r, double d_w, const Region& region = Region::all());

}  // namespace reference

}  // namespace kslab
