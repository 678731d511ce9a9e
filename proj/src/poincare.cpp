#include "kslab/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "kslab/smoothing.hpp"

namespace kslab {

std::string to_string(PoincareMode m) {
  switch (m) {
    case PoincareMode::lip: return "lip";
    case PoincareMode::ks: return "ks";
    case PoincareMode::energy_measure: return "energy_measure";
  }
  return "lip";
}

std::vector<double> default_radii(const MeasuredPointCloud& cloud, double lambda, int per_decade) {
  if (!(lambda >= 1.0)) throw std::invalid_argument("default_radii: lambda must be >= 1");
  if (per_decade < 1) throw std::invalid_argument("default_radii: per_decade must be >= 1");
  const double hi = cloud.diameter() / (2.0 * lambda);
  const double step = std::pow(10.0, -1.0 / per_decade);
  std::vector<double> radii;
  for (double r = hi; r >= cloud.admissible_floor(); r *= step) radii.push_back(r);
  if (radii.empty()) throw InadmissibleScale("default_radii: no admissible radius");
  return radii;
}

std::vector<BallSample> sample_balls(const MeasuredPointCloud& cloud, std::size_t n_centers,
                                     std::span<const double> radii, std::uint64_t seed,
                                     std::span<const PointId> candidates) {
  const std::size_t pool = candidates.empty() ? cloud.size() : candidates.size();
  if (pool == 0) throw std::invalid_argument("sample_balls: no candidate centers");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
  std::vector<BallSample> out;
  out.reserve(n_centers * radii.size());
  for (std::size_t i = 0; i < n_centers; ++i) {
    const std::size_t k = pick(rng);
    const PointId c = candidates.empty() ? static_cast<PointId>(k) : candidates[k];
    for (double r : radii) out.push_back({c, r});
  }
  return out;
}

PoincareReport poincare_check(const ScalarField& f, PoincareMode mode, double d_w,
                              std::span<const BallSample> balls, const PoincareOptions& opts) {
  const MeasuredPointCloud& cloud = f.cloud();
  if (!(opts.lambda >= 1.0)) throw std::invalid_argument("poincare_check: lambda must be >= 1");
  if (!(d_w >= 2.0)) throw std::invalid_argument("poincare_check: d_w must be >= 2");
  if (mode == PoincareMode::energy_measure && opts.form == nullptr) {
    throw std::invalid_argument("poincare_check: energy_measure mode needs a graph form");
  }
  if (opts.form != nullptr && &opts.form->cloud() != &cloud) {
    throw std::invalid_argument("poincare_check: form lives on another cloud");
  }
  const double r_hi = cloud.diameter() / (2.0 * opts.lambda) * (1.0 + 1e-12);
  for (const BallSample& b : balls) {
    if (b.radius < cloud.admissible_floor() || b.radius > r_hi) {
      throw InadmissibleScale("poincare_check: radius outside [kappa h, diam/(2 lambda)]");
    }
  }

  PoincareReport rep;
  rep.mode = mode;
  rep.d_w = d_w;
  rep.lambda = opts.lambda;
  rep.seed = opts.seed;
  rep.rhs_floor = 1e-14 * f.l2_norm_squared();

  // Per-point density whose mass over lambda B is the rhs (mode ks uses the window instead).
  std::vector<double> density;
  std::optional<LocalEnergyWindow> window;
  double exponent = d_w;
  switch (mode) {
    case PoincareMode::lip: {
      const ScalarField lip = discrete_lip(f, cloud.admissible_floor());
      density.resize(cloud.size());
      for (std::size_t x = 0; x < cloud.size(); ++x) {
        const double l = lip[static_cast<PointId>(x)];
        density[x] = cloud.weight(static_cast<PointId>(x)) * l * l;
      }
      exponent = 2.0;
      break;
    }
    case PoincareMode::ks:
      window.emplace(f, d_w, opts.grid ? *opts.grid : ScaleGrid::standard(cloud), opts.window);
      break;
    case PoincareMode::energy_measure:
      density = energy_measure(*opts.form, f).density;
      break;
  }

  rep.samples.resize(balls.size());
  const std::span<const double> v = f.values();
#pragma omp parallel
  {
    std::vector<PointId> inner, outer;
#pragma omp for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(balls.size()); ++i) {
      const BallSample& b = balls[static_cast<std::size_t>(i)];
      cloud.ball_members(b.center, b.radius, inner, true);
      double mass = 0.0, mean = 0.0;
      for (PointId y : inner) {
        mass += cloud.weight(y);
        mean += cloud.weight(y) * v[y];
      }
      mean /= mass;
      double lhs = 0.0;
      for (PointId y : inner) lhs += cloud.weight(y) * (v[y] - mean) * (v[y] - mean);

      cloud.ball_members(b.center, opts.lambda * b.radius, outer, true);
      double rhs_mass = 0.0;
      if (window) {
        rhs_mass = window->liminf(std::span<const PointId>(outer));
      } else {
        for (PointId y : outer) rhs_mass += density[y];
      }
      const double rhs = std::pow(b.radius, exponent) * rhs_mass;
      PoincareSample& s = rep.samples[static_cast<std::size_t>(i)];
      s = {b.center, b.radius, lhs, rhs, 0.0, rhs > rep.rhs_floor};
      if (s.counted) s.ratio = lhs / rhs;
    }
  }
  for (const PoincareSample& s : rep.samples) {
    if (s.counted) rep.c_best = std::max(rep.c_best, s.ratio);
  }
  return rep;
}

namespace {

std::vector<double> rho_values(const MeasuredPointCloud& cloud, const ScaleGrid& grid, double radius) {
  std::vector<double> rhos;
  for (double r : grid.admissible(cloud)) {
    if (r < radius) rhos.push_back(r);
  }
  return rhos;
}

double maximal_at(const MeasuredPointCloud& cloud, const LocalEnergyWindow& w, PointId x,
                  std::span<const double> rhos, std::vector<PointId>& members) {
  double best = 0.0;
  for (double rho : rhos) {
    cloud.ball_members(x, rho, members, false);
    double mass = 0.0;
    for (PointId y : members) mass += cloud.weight(y);
    best = std::max(best, w.liminf(std::span<const PointId>(members)) / mass);
  }
  return std::sqrt(best);
}

}  // namespace

MaximalField maximal_function(const ScalarField& f, double radius, double d_w, const ScaleGrid& grid, int window) {
  const MeasuredPointCloud& cloud = f.cloud();
  MaximalField m;
  m.cloud = &cloud;
  m.radius = radius;
  m.d_w = d_w;
  m.rhos = rho_values(cloud, grid, radius);
  if (m.rhos.empty()) throw InadmissibleScale("maximal_function: no admissible rho below R");
  const LocalEnergyWindow w(f, d_w, grid, window);
  m.energy_proxy = w.liminf(Region::all());
  m.values.assign(cloud.size(), 0.0);
#pragma omp parallel
  {
    std::vector<PointId> members;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t x = 0; x < static_cast<std::ptrdiff_t>(cloud.size()); ++x) {
      m.values[static_cast<std::size_t>(x)] = maximal_at(cloud, w, static_cast<PointId>(x), m.rhos, members);
    }
  }
  return m;
}

WeakL2Report weak_l2_check(const MaximalField& maximal, std::span<const double> thresholds) {
  if (thresholds.empty()) throw std::invalid_argument("weak_l2_check: no thresholds");
  const bool nonzero = std::any_of(maximal.values.begin(), maximal.values.end(), [](double v) { return v > 0.0; });
  if (!(maximal.energy_proxy > 0.0) && nonzero) {
    throw std::logic_error("weak_l2_check: zero global energy with a nonzero maximal field");
  }
  WeakL2Report rep;
  for (double t : thresholds) {
    if (!(t > 0.0)) throw std::invalid_argument("weak_l2_check: thresholds must be positive");
    double mass = 0.0;
    for (std::size_t x = 0; x < maximal.values.size(); ++x) {
      if (maximal.values[x] > t) mass += maximal.cloud->weight(static_cast<PointId>(x));
    }
    const double q = mass == 0.0 ? 0.0 : mass * t * t / maximal.energy_proxy;
    rep.thresholds.push_back(t);
    rep.level_mass.push_back(mass);
    rep.quotients.push_back(q);
    rep.max_quotient = std::max(rep.max_quotient, q);
  }
  return rep;
}

TelescopingReport telescoping_bound(const ScalarField& f, PointId x, double rho, double d_w,
                                    const ScaleGrid& grid, double lambda, double c_allowed, int window) {
  const MeasuredPointCloud& cloud = f.cloud();
  const double floor = cloud.admissible_floor();
  if (rho < 4.0 * floor) throw InadmissibleScale("telescoping_bound: rho must be at least 4 kappa h");
  if (!(lambda >= 1.0)) throw std::invalid_argument("telescoping_bound: lambda must be >= 1");
  TelescopingReport rep;
  for (double r = rho; r >= floor; r *= 0.5) {
    rep.radii.push_back(r);
    rep.averages.push_back(ball_average(cloud, f.values(), cloud.ball(x, r)));
  }
  for (std::size_t k = 0; k + 1 < rep.averages.size(); ++k) {
    rep.chain_sum += std::abs(rep.averages[k] - rep.averages[k + 1]);
  }
  rep.lhs = std::abs(rep.averages.front() - rep.averages.back());

  const std::vector<double> rhos = rho_values(cloud, grid, lambda * rho);
  if (rhos.empty()) throw InadmissibleScale("telescoping_bound: no admissible rho for the maximal function");
  const LocalEnergyWindow w(f, d_w, grid, window);
  std::vector<PointId> members;
  rep.maximal = maximal_at(cloud, w, x, rhos, members);
  rep.rhs = std::pow(rho, d_w / 2.0) * rep.maximal;
  if (rep.lhs == 0.0) {
    rep.c_report = 0.0;
  } else {
    rep.c_report = rep.rhs > 0.0 ? rep.lhs / rep.rhs : std::numeric_limits<double>::infinity();
  }
  rep.ok = rep.c_report <= c_allowed;
  return rep;
}

}  // namespace kslab
