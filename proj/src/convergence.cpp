#include "kslab/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "kernels.hpp"
#include "kslab/smoothing.hpp"

namespace kslab {

namespace {

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*hi == 0.0) return 1.0;
  if (*lo <= 0.0) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

double liminf_energy(const ScalarField& f, double d_w, const ScaleGrid& grid, int window) {
  // Only the window scales matter; the large scales of a full sweep dominate the cost.
  return LocalEnergyWindow(f, d_w, grid, window).liminf(Region::all());
}

}  // namespace

MoscoReport recovery_check(const ScalarField& f, double d_w, std::span<const ScalePair> pairs, double oracle,
                           std::string oracle_source) {
  const MeasuredPointCloud& cloud = f.cloud();
  if (pairs.empty()) throw std::invalid_argument("recovery_check: no scale pairs");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].eps < 2.0 * cloud.mesh() || pairs[i].r < cloud.admissible_floor()) {
      throw InadmissibleScale("recovery_check: inadmissible scale pair");
    }
    if (i > 0 && (pairs[i].eps > pairs[i - 1].eps || pairs[i].r > pairs[i - 1].r)) {
      throw std::invalid_argument("recovery_check: scale pairs must decrease");
    }
  }
  const bool constant = f.is_constant();
  if (!(oracle >= 0.0)) throw std::invalid_argument("recovery_check: negative oracle");
  if (oracle == 0.0 && !constant) throw std::invalid_argument("recovery_check: zero oracle for a nonconstant field");

  MoscoReport rep;
  rep.oracle = oracle;
  rep.oracle_source = std::move(oracle_source);
  rep.vacuous = constant;
  std::vector<double> margins;
  for (const ScalePair& p : pairs) {
    const PartitionOfUnity pou(cloud, build_net(cloud, p.eps));
    const ScalarField fe = mollify(f, pou);
    RecoveryStep s;
    s.eps = p.eps;
    s.r = p.r;
    s.energy = ks_energy(fe, p.r, d_w);
    s.l2_error = (fe - f).l2_norm();
    s.margin = constant ? 0.0 : s.energy / oracle;
    margins.push_back(s.margin);
    rep.recovery.push_back(s);
  }
  rep.recovery_margin = *std::max_element(margins.begin(), margins.end());
  rep.recovery_spread = spread(margins);
  rep.strong_trend = true;
  for (std::size_t i = 1; i < rep.recovery.size(); ++i) {
    if (rep.recovery[i].l2_error > 1.05 * rep.recovery[i - 1].l2_error) rep.strong_trend = false;
  }
  return rep;
}

MoscoReport& weak_liminf_probe(MoscoReport& rep, const ScalarField& f, double d_w, const Spectrum& spec,
                               std::span<const double> scales, const ProbeOptions& opts) {
  const MeasuredPointCloud& cloud = f.cloud();
  if (spec.cloud != &cloud) throw std::invalid_argument("weak_liminf_probe: spectrum lives on another cloud");
  const std::size_t k_probes = scales.size();
  if (k_probes == 0) throw std::invalid_argument("weak_liminf_probe: no scales");
  if (spec.count() < k_probes + 10 || spec.count() <= opts.first_k + k_probes) {
    throw std::invalid_argument("weak_liminf_probe: spectrum too short for the requested probes");
  }
  for (double r : scales) {
    if (r < cloud.admissible_floor()) throw InadmissibleScale("weak_liminf_probe: inadmissible scale");
  }

  // Test fields: unit-normalized distances to seeded points.
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);
  std::vector<ScalarField> tests;
  for (std::size_t j = 0; j < opts.test_fields; ++j) {
    const auto p = static_cast<PointId>(pick(rng));
    std::vector<double> g(cloud.size());
    for (std::size_t y = 0; y < g.size(); ++y) g[y] = cloud.distance(p, static_cast<PointId>(y));
    ScalarField gf(cloud, std::move(g));
    tests.push_back(gf * (1.0 / gf.l2_norm()));
  }

  const bool vacuous = rep.oracle == 0.0;
  rep.weak_null = true;
  std::vector<double> margins;
  for (std::size_t n = 0; n < k_probes; ++n) {
    LiminfStep s;
    s.r = scales[n];
    s.k = opts.first_k + n + 1;
    s.amplitude = opts.unit_energy ? opts.amplitude / std::sqrt(spec.eigenvalues[s.k]) : opts.amplitude;
    const ScalarField pert = spec.eigenfield(s.k) * s.amplitude;
    for (const ScalarField& g : tests) s.max_test_inner = std::max(s.max_test_inner, std::abs(pert.inner(g)));
    if (s.max_test_inner > 0.05 * std::abs(s.amplitude)) rep.weak_null = false;
    s.energy = opts.amplitude == 0.0 ? ks_energy(f, s.r, d_w) : ks_energy(f + pert, s.r, d_w);
    s.margin = vacuous ? 0.0 : s.energy / rep.oracle;
    margins.push_back(s.margin);
    rep.liminf.push_back(s);
  }
  rep.liminf_margin = *std::min_element(margins.begin(), margins.end());
  rep.liminf_spread = vacuous ? 1.0 : spread(margins);
  return rep;
}

CompactnessProbe compactness_probe(std::span<const ScalarField> fields, double d_w, double cap, double delta,
                                   const ScaleGrid& grid, int window) {
  if (fields.empty()) throw std::invalid_argument("compactness_probe: empty family");
  if (!(cap > 0.0) || !(delta > 0.0)) throw std::invalid_argument("compactness_probe: cap and delta must be positive");
  const MeasuredPointCloud& cloud = fields.front().cloud();
  CompactnessProbe cp;
  cp.family_size = fields.size();
  cp.cap = cap;
  cp.delta = delta;
  cp.budgets.resize(fields.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(fields.size()); ++i) {
    const ScalarField& f = fields[static_cast<std::size_t>(i)];
    require_same_cloud(f, cloud, "compactness_probe");
    cp.budgets[static_cast<std::size_t>(i)] = f.l2_norm_squared() + liminf_energy(f, d_w, grid, window);
  }
  for (double b : cp.budgets) {
    if (b > cap * (1.0 + 1e-9)) throw std::invalid_argument("compactness_probe: a field exceeds the energy cap");
  }

  const std::size_t n = fields.size();
  std::vector<double> dist(n * n, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (fields[i] - fields[j]).l2_norm();
      dist[i * n + j] = d;
      dist[j * n + i] = d;
    }
  }
  // Farthest-point selection, starting from the first field.
  std::vector<double> to_net(n, std::numeric_limits<double>::infinity());
  std::size_t next = 0;
  while (true) {
    cp.net.push_back(next);
    for (std::size_t j = 0; j < n; ++j) to_net[j] = std::min(to_net[j], dist[next * n + j]);
    const auto far = std::max_element(to_net.begin(), to_net.end());
    if (*far <= delta) break;
    next = static_cast<std::size_t>(far - to_net.begin());
  }
  cp.net_size = cp.net.size();
  return cp;
}

SobolevReport sobolev_check(std::span<const ScalarField> fields, double d_w, double q_dim, const ScaleGrid& grid,
                            int window) {
  if (!(q_dim > 0.0)) throw std::invalid_argument("sobolev_check: Q must be positive");
  if (fields.empty()) throw std::invalid_argument("sobolev_check: no fields");
  SobolevReport rep;
  rep.sup_branch = q_dim <= d_w;
  if (rep.sup_branch) {
    rep.theta = q_dim / d_w;
  } else {
    rep.q = 2.0 * q_dim / (q_dim - d_w);
  }
  for (const ScalarField& f : fields) {
    if (f.is_constant()) throw std::invalid_argument("sobolev_check: constant fields are excluded");
    const double l2 = f.l2_norm();
    const double e = liminf_energy(f, d_w, grid, window);
    const double budget = l2 + std::sqrt(e);
    double quotient = 0.0;
    if (rep.sup_branch) {
      quotient = f.sup_norm() / (std::pow(budget, rep.theta) * std::pow(l2, 1.0 - rep.theta));
    } else {
      const MeasuredPointCloud& cloud = f.cloud();
      std::vector<double> terms(f.size());
      for (std::size_t x = 0; x < f.size(); ++x) {
        terms[x] = cloud.weight(static_cast<PointId>(x)) * std::pow(std::abs(f[static_cast<PointId>(x)]), rep.q);
      }
      quotient = std::pow(detail::ordered_sum(terms), 1.0 / rep.q) / budget;
    }
    rep.quotients.push_back(quotient);
    rep.max_quotient = std::max(rep.max_quotient, quotient);
  }
  return rep;
}

}  // namespace kslab
