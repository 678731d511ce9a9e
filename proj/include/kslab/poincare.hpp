#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kslab/energy.hpp"
#include "kslab/field.hpp"
#include "kslab/graphform.hpp"

namespace kslab {

enum class PoincareMode { lip, ks, energy_measure };

std::string to_string(PoincareMode m);

struct BallSample {
  PointId center;
  double radius;
};

/// Radii r_hi, r_hi 10^{-1/per_decade}, ... down to kappa*h, with r_hi = diam / (2 lambda).
std::vector<double> default_radii(const MeasuredPointCloud& cloud, double lambda, int per_decade = 4);

/// Every radius paired with each of `n_centers` seeded random centers (from `candidates`
/// when nonempty).
std::vector<BallSample> sample_balls(const MeasuredPointCloud& cloud, std::size_t n_centers,
                                     std::span<const double> radii, std::uint64_t seed,
                                     std::span<const PointId> candidates = {});

struct PoincareSample {
  PointId center;
  double radius;
  double lhs;     // int_B |f - f_B|^2
  double rhs;
  double ratio;   // lhs / rhs, 0 when rhs is below the floor
  bool counted;   // rhs above the floor
};

struct PoincareReport {
  PoincareMode mode = PoincareMode::lip;
  double d_w = 2.0;
  double lambda = 2.0;
  double rhs_floor = 0.0;
  double c_best = 0.0;
  std::uint64_t seed = 0;
  std::vector<PoincareSample> samples;
};

struct PoincareOptions {
  double lambda = 2.0;
  std::uint64_t seed = 0;               // recorded only; sampling happens in sample_balls
  const GraphDirichletForm* form = nullptr;  // required for energy_measure
  std::optional<ScaleGrid> grid;        // liminf window for mode=ks; standard grid if empty
  int window = 3;
};

/// Right-hand sides: lip -> R^2 int_{lambda B} (Lip_h f)^2 with r_loc = kappa h;
/// ks -> R^{d_w} liminf_proxy E_{d_w/2, lambda B}(f, .); energy_measure -> R^{d_w} Gamma(f,f)(lambda B).
PoincareReport poincare_check(const ScalarField& f, PoincareMode mode, double d_w,
                              std::span<const BallSample> balls, const PoincareOptions& opts = {});

struct MaximalField {
  const MeasuredPointCloud* cloud = nullptr;
  double radius = 0.0;
  double d_w = 2.0;
  std::vector<double> values;
  std::vector<double> rhos;      // the sup runs over these
  double energy_proxy = 0.0;     // liminf_proxy of E_{d_w/2,X}(f, .) from the same window
};

/// M_R f(x) = sup_{rho} [ liminf_proxy E_{d_w/2,B(x,rho)}(f,.) / mu(B(x,rho)) ]^{1/2} over the
/// admissible scales of `grid` below R. The liminf window is the `window` smallest admissible
/// scales of `grid`.
MaximalField maximal_function(const ScalarField& f, double radius, double d_w, const ScaleGrid& grid,
                              int window = 3);

struct WeakL2Report {
  std::vector<double> thresholds;
  std::vector<double> level_mass;   // mu{M > t}
  std::vector<double> quotients;    // mu{M > t} t^2 / energy_proxy
  double max_quotient = 0.0;
};

WeakL2Report weak_l2_check(const MaximalField& maximal, std::span<const double> thresholds);

struct TelescopingReport {
  std::vector<double> radii;     // rho, rho/2, ... down to the admissible floor
  std::vector<double> averages;  // f_{B(x, radii[k])}
  double chain_sum = 0.0;        // sum_k |f_{B_k} - f_{B_{k+1}}|
  double lhs = 0.0;              // |f_{B(x,rho)} - f_{B(x,rho_min)}|
  double maximal = 0.0;          // M_{lambda rho} f(x)
  double rhs = 0.0;              // rho^{d_w/2} M_{lambda rho} f(x)
  double c_report = 0.0;
  bool ok = false;
};

/// Dyadic chain estimate at a single point. Needs rho >= 4 kappa h.
TelescopingReport telescoping_bound(const ScalarField& f, PointId x, double rho, double d_w,
                                    const ScaleGrid& grid, double lambda = 2.0, double c_allowed = 4.0,
                                    int window = 3);

}  // namespace kslab
