#include "kslab/graphform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "kernels.hpp"
#include "kslab/smoothing.hpp"

namespace kslab {

std::string to_string(FormKind k) {
  switch (k) {
    case FormKind::grid1d: return "grid1d";
    case FormKind::grid2d: return "grid2d";
    case FormKind::gasket: return "gasket";
    case FormKind::custom: return "custom";
  }
  return "custom";
}

GraphDirichletForm::GraphDirichletForm(const MeasuredPointCloud& cloud, std::vector<Edge> edges,
                                       FormKind kind, int level, double renorm)
    : cloud_(&cloud), kind_(kind), level_(level), renorm_(renorm) {
  const std::size_t n = cloud.size();
  std::map<std::pair<PointId, PointId>, double> merged;
  for (const Edge& e : edges) {
    if (e.a >= n || e.b >= n) throw std::invalid_argument("GraphDirichletForm: edge endpoint out of range");
    if (e.a == e.b) throw std::invalid_argument("GraphDirichletForm: self-loop");
    if (!(e.c > 0.0) || !std::isfinite(e.c)) {
      throw std::invalid_argument("GraphDirichletForm: conductances must be positive and finite");
    }
    merged[{std::min(e.a, e.b), std::max(e.a, e.b)}] += e.c;
  }
  edges_.reserve(merged.size());
  for (const auto& [k, c] : merged) edges_.push_back({k.first, k.second, c});

  std::vector<std::size_t> deg(n, 0);
  for (const Edge& e : edges_) {
    ++deg[e.a];
    ++deg[e.b];
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t x = 0; x < n; ++x) offsets_[x + 1] = offsets_[x] + deg[x];
  adjacency_.resize(offsets_[n]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    adjacency_[fill[e.a]++] = {e.b, e.c};
    adjacency_[fill[e.b]++] = {e.a, e.c};
  }
}

std::span<const GraphDirichletForm::Neighbor> GraphDirichletForm::neighbors(PointId x) const {
  return {adjacency_.data() + offsets_[x], offsets_[x + 1] - offsets_[x]};
}

bool GraphDirichletForm::connected() const {
  const std::size_t n = size();
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::vector<PointId> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const PointId x = stack.back();
    stack.pop_back();
    for (const auto& nb : neighbors(x)) {
      if (!seen[nb.y]) {
        seen[nb.y] = 1;
        ++count;
        stack.push_back(nb.y);
      }
    }
  }
  return count == n;
}

GraphDirichletForm build_form(const MeasuredPointCloud& cloud, FormKind kind) {
  const SpaceSpec& spec = cloud.spec();
  std::vector<Edge> edges;
  switch (kind) {
    case FormKind::grid1d: {
      if (spec.kind != SpaceKind::interval_grid) throw std::invalid_argument("build_form: grid1d needs an interval grid");
      const int n = spec.size;
      const double h = cloud.mesh();
      const double c = (1.0 / n) / (h * h);
      for (int i = 0; i + 1 < n; ++i) edges.push_back({static_cast<PointId>(i), static_cast<PointId>(i + 1), c});
      return GraphDirichletForm(cloud, std::move(edges), kind, n, c);
    }
    case FormKind::grid2d: {
      if (spec.kind != SpaceKind::square_grid) throw std::invalid_argument("build_form: grid2d needs a square grid");
      const int n = spec.size;
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const auto id = static_cast<PointId>(j * n + i);
          if (i + 1 < n) edges.push_back({id, id + 1, 1.0});
          if (j + 1 < n) edges.push_back({id, static_cast<PointId>(id + n), 1.0});
        }
      }
      return GraphDirichletForm(cloud, std::move(edges), kind, n, 1.0);
    }
    case FormKind::gasket: {
      if (spec.kind != SpaceKind::gasket) throw std::invalid_argument("build_form: gasket form needs a gasket cloud");
      const int m = spec.size;
      const double c = std::pow(5.0 / 3.0, m);
      const GasketLattice lat = gasket_lattice(m);
      for (const auto& cell : lat.cells) {
        edges.push_back({cell[0], cell[1], c});
        edges.push_back({cell[0], cell[2], c});
        edges.push_back({cell[1], cell[2], c});
      }
      return GraphDirichletForm(cloud, std::move(edges), kind, m, c);
    }
    case FormKind::custom: break;
  }
  throw std::invalid_argument("build_form: custom forms are constructed from explicit edges");
}

double bilinear(const GraphDirichletForm& form, const ScalarField& f, const ScalarField& g) {
  require_same_cloud(f, form.cloud(), "bilinear");
  require_same_cloud(g, form.cloud(), "bilinear");
  double s = 0.0;
  for (const Edge& e : form.edges()) s += e.c * (f[e.a] - f[e.b]) * (g[e.a] - g[e.b]);
  return s;
}

double form_energy(const GraphDirichletForm& form, const ScalarField& f) { return bilinear(form, f, f); }

double EnergyMeasure::mass(std::span<const PointId> ids) const {
  double s = 0.0;
  for (PointId x : ids) s += density[x];
  return s;
}

EnergyMeasure energy_measure(const GraphDirichletForm& form, const ScalarField& f) {
  require_same_cloud(f, form.cloud(), "energy_measure");
  EnergyMeasure em;
  em.density.assign(form.size(), 0.0);
  for (std::size_t x = 0; x < form.size(); ++x) {
    double s = 0.0;
    for (const auto& nb : form.neighbors(static_cast<PointId>(x))) {
      const double d = f[static_cast<PointId>(x)] - f[nb.y];
      s += nb.c * d * d;
    }
    em.density[x] = 0.5 * s;
  }
  em.total = detail::ordered_sum(em.density);
  return em;
}

ScalarField harmonic_extension(const GraphDirichletForm& form, std::span<const PointId> boundary,
                               std::span<const double> values) {
  const std::size_t n = form.size();
  if (boundary.empty() || boundary.size() != values.size()) {
    throw std::invalid_argument("harmonic_extension: need matching nonempty boundary ids and values");
  }
  std::vector<double> f(n, 0.0);
  std::vector<long> slot(n, -1);
  std::vector<char> fixed(n, 0);
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    fixed.at(boundary[i]) = 1;
    f[boundary[i]] = values[i];
  }
  long m = 0;
  for (std::size_t x = 0; x < n; ++x) {
    if (!fixed[x]) slot[x] = m++;
  }
  if (m == 0) return ScalarField(form.cloud(), std::move(f));

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (std::size_t x = 0; x < n; ++x) {
    if (fixed[x]) continue;
    double diag = 0.0;
    for (const auto& nb : form.neighbors(static_cast<PointId>(x))) {
      diag += nb.c;
      if (fixed[nb.y]) {
        rhs[slot[x]] += nb.c * f[nb.y];
      } else {
        trip.emplace_back(slot[x], slot[nb.y], -nb.c);
      }
    }
    trip.emplace_back(slot[x], slot[x], diag);
  }
  Eigen::SparseMatrix<double> a(m, m);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("harmonic_extension: singular system (is every component anchored?)");
  }
  const Eigen::VectorXd u = solver.solve(rhs);
  for (std::size_t x = 0; x < n; ++x) {
    if (!fixed[x]) f[x] = u[slot[x]];
  }
  return ScalarField(form.cloud(), std::move(f));
}

ScalarField gasket_harmonic(const MeasuredPointCloud& gasket, const std::array<double, 3>& corners) {
  if (gasket.spec().kind != SpaceKind::gasket) throw std::invalid_argument("gasket_harmonic: not a gasket cloud");
  const int m = gasket.spec().size;
  const int side = 1 << m;
  const auto key = [side](int a, int b) { return static_cast<long>(b) * (side + 1) + a; };
  std::map<long, double> value;
  value[key(0, 0)] = corners[0];
  value[key(side, 0)] = corners[1];
  value[key(0, side)] = corners[2];

  struct Cell {
    int a, b, s;
  };
  std::vector<Cell> cells{{0, 0, side}};
  while (!cells.empty() && cells.front().s > 1) {
    std::vector<Cell> next;
    for (const Cell& c : cells) {
      const int h = c.s / 2;
      const double v0 = value.at(key(c.a, c.b));
      const double v1 = value.at(key(c.a + c.s, c.b));
      const double v2 = value.at(key(c.a, c.b + c.s));
      // Each midpoint takes 2/5 of its edge's endpoints and 1/5 of the opposite corner.
      value[key(c.a + h, c.b)] = (2.0 * v0 + 2.0 * v1 + v2) / 5.0;
      value[key(c.a, c.b + h)] = (2.0 * v0 + v1 + 2.0 * v2) / 5.0;
      value[key(c.a + h, c.b + h)] = (v0 + 2.0 * v1 + 2.0 * v2) / 5.0;
      next.push_back({c.a, c.b, h});
      next.push_back({c.a + h, c.b, h});
      next.push_back({c.a, c.b + h, h});
    }
    cells = std::move(next);
  }
  const GasketLattice lat = gasket_lattice(m);
  std::vector<double> f(lat.vertices.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = value.at(key(lat.vertices[i][0], lat.vertices[i][1]));
  return ScalarField(gasket, std::move(f));
}

namespace {

double shortest_path_bound(const GraphDirichletForm& form, PointId x, PointId y) {
  const MeasuredPointCloud& cloud = form.cloud();
  std::vector<double> dist(form.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, PointId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[x] = 0.0;
  pq.push({0.0, x});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    if (u == y) break;
    for (const auto& nb : form.neighbors(u)) {
      const double len = std::sqrt(2.0 * std::min(cloud.weight(u), cloud.weight(nb.y)) / nb.c);
      if (d + len < dist[nb.y]) {
        dist[nb.y] = d + len;
        pq.push({dist[nb.y], nb.y});
      }
    }
  }
  return dist[y];
}

// Slack s_z = mu_z - Gamma(f,f)(z); returns false if any is nonpositive.
bool slacks(const GraphDirichletForm& form, const Eigen::VectorXd& f, Eigen::VectorXd& s) {
  const MeasuredPointCloud& cloud = form.cloud();
  bool ok = true;
  for (std::size_t z = 0; z < form.size(); ++z) {
    double g = 0.0;
    for (const auto& nb : form.neighbors(static_cast<PointId>(z))) {
      const double d = f[static_cast<long>(z)] - f[nb.y];
      g += nb.c * d * d;
    }
    s[static_cast<long>(z)] = cloud.weight(static_cast<PointId>(z)) - 0.5 * g;
    if (!(s[static_cast<long>(z)] > 0.0)) ok = false;
  }
  return ok;
}

double barrier_value(double t, PointId x, const Eigen::VectorXd& f, const Eigen::VectorXd& s) {
  return -t * f[x] - s.array().log().sum();
}

}  // namespace

IntrinsicMetricResult intrinsic_metric(const GraphDirichletForm& form, PointId x, PointId y, int iterations) {
  const std::size_t n = form.size();
  if (x >= n || y >= n) throw std::invalid_argument("intrinsic_metric: vertex out of range");
  if (iterations < 1) throw std::invalid_argument("intrinsic_metric: iterations must be >= 1");
  IntrinsicMetricResult res;
  if (x == y) return res;
  res.path_bound = shortest_path_bound(form, x, y);
  if (!std::isfinite(res.path_bound)) throw std::invalid_argument("intrinsic_metric: vertices are disconnected");

  // Unknowns: f on every vertex but y, which is pinned at 0.
  std::vector<long> slot(n, -1);
  long m = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (v != y) slot[v] = m++;
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<long>(n));
  Eigen::VectorXd s(static_cast<long>(n)), s_trial(static_cast<long>(n));
  slacks(form, f, s);

  const double target_gap = 1e-7 * res.path_bound;
  double t = static_cast<double>(n) / res.path_bound;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  bool analyzed = false;

  for (int outer = 0; outer < iterations; ++outer) {
    for (int inner = 0; inner < 200; ++inner) {
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(m);
      std::vector<Eigen::Triplet<double>> trip;
      if (slot[x] >= 0) grad[slot[x]] -= t;
      for (std::size_t z = 0; z < n; ++z) {
        const auto zi = static_cast<PointId>(z);
        const double inv = 1.0 / s[static_cast<long>(z)];
        const auto nbs = form.neighbors(zi);
        // Gradient of Gamma_z: entry z gets sum c (f_z - f_w), entry w gets -c (f_z - f_w).
        std::vector<std::pair<long, double>> g;
        g.reserve(nbs.size() + 1);
        double gz = 0.0, cz = 0.0;
        for (const auto& nb : nbs) {
          const double d = f[static_cast<long>(z)] - f[nb.y];
          gz += nb.c * d;
          cz += nb.c;
          if (slot[nb.y] >= 0) {
            g.emplace_back(slot[nb.y], -nb.c * d);
            trip.emplace_back(slot[nb.y], slot[nb.y], nb.c * inv);
            if (slot[z] >= 0) {
              trip.emplace_back(slot[z], slot[nb.y], -nb.c * inv);
              trip.emplace_back(slot[nb.y], slot[z], -nb.c * inv);
            }
          }
        }
        if (slot[z] >= 0) {
          g.emplace_back(slot[z], gz);
          trip.emplace_back(slot[z], slot[z], cz * inv);
        }
        for (const auto& [i, gi] : g) {
          grad[i] += gi * inv;
          for (const auto& [j, gj] : g) trip.emplace_back(i, j, gi * gj * inv * inv);
        }
      }
      Eigen::SparseMatrix<double> hess(m, m);
      hess.setFromTriplets(trip.begin(), trip.end());
      if (!analyzed) {
        solver.analyzePattern(hess);
        analyzed = true;
      }
      solver.factorize(hess);
      if (solver.info() != Eigen::Success) throw std::runtime_error("intrinsic_metric: Newton system failed");
      const Eigen::VectorXd step = solver.solve(-grad);
      ++res.newton_steps;
      const double decrement = -grad.dot(step);
      if (decrement < 1e-12) break;

      Eigen::VectorXd full_step = Eigen::VectorXd::Zero(static_cast<long>(n));
      for (std::size_t v = 0; v < n; ++v) {
        if (slot[v] >= 0) full_step[static_cast<long>(v)] = step[slot[v]];
      }
      const double phi0 = barrier_value(t, x, f, s);
      double alpha = 1.0;
      Eigen::VectorXd trial;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        trial = f + alpha * full_step;
        if (!slacks(form, trial, s_trial)) continue;
        if (barrier_value(t, x, trial, s_trial) <= phi0 - 0.25 * alpha * decrement) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      f = trial;
      s = s_trial;
      if (decrement < 1e-10) break;
    }
    res.gap_bound = static_cast<double>(n) / t;
    if (res.gap_bound <= target_gap) break;
    t *= 8.0;
  }
  // Every accepted iterate has strictly positive slacks, so f is feasible.
  res.lower = f[x] - f[y];
  return res;
}

GammaLipReport gamma_vs_lip_check(const GraphDirichletForm& form, const ScalarField& f, double r_loc) {
  if (form.kind() != FormKind::grid1d && form.kind() != FormKind::grid2d) {
    throw std::invalid_argument("gamma_vs_lip_check: only grid forms are in scope");
  }
  const EnergyMeasure em = energy_measure(form, f);
  const ScalarField lip = discrete_lip(f, r_loc);
  const MeasuredPointCloud& cloud = form.cloud();
  GammaLipReport rep;
  for (std::size_t x = 0; x < form.size(); ++x) {
    const double l = lip[static_cast<PointId>(x)];
    if (!(l > 0.0)) continue;
    ++rep.vertices_used;
    rep.c_best = std::max(rep.c_best, em.density[x] / cloud.weight(static_cast<PointId>(x)) / (l * l));
  }
  return rep;
}

}  // namespace kslab
