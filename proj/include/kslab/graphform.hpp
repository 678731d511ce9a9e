#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kslab/energy.hpp"
#include "kslab/field.hpp"

namespace kslab {

enum class FormKind { grid1d, grid2d, gasket, custom };

std::string to_string(FormKind k);

struct Edge {
  PointId a;
  PointId b;
  double c;
};

/// Conductance network on the points of a cloud, with the cloud's weights as measure:
///
///     E(f,f) = 1/2 sum_{x,y} c_xy (f_x - f_y)^2,   L f(x) = (1/mu_x) sum_y c_xy (f_x - f_y).
///
/// `renorm` is the uniform conductance of the built-in networks; it is what turns combinatorial
/// energies into energies that converge as the mesh shrinks.
class GraphDirichletForm {
 public:
  struct Neighbor {
    PointId y;
    double c;
  };

  /// Edges are symmetrized and merged; self-loops and c <= 0 are rejected.
  GraphDirichletForm(const MeasuredPointCloud& cloud, std::vector<Edge> edges,
                     FormKind kind = FormKind::custom, int level = 0, double renorm = 1.0);

  const MeasuredPointCloud& cloud() const { return *cloud_; }
  FormKind kind() const { return kind_; }
  int level() const { return level_; }
  double renorm() const { return renorm_; }
  std::size_t size() const { return cloud_->size(); }
  std::span<const Edge> edges() const { return edges_; }  // a < b, sorted
  std::span<const Neighbor> neighbors(PointId x) const;
  bool connected() const;

 private:
  const MeasuredPointCloud* cloud_;
  FormKind kind_;
  int level_;
  double renorm_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
};

/// grid1d: nearest neighbours with c = mu/h^2; grid2d: 4-neighbour lattice with c = 1;
/// gasket: level-m graph with c = (5/3)^m. Throws std::invalid_argument when the cloud
/// was not built for that kind.
GraphDirichletForm build_form(const MeasuredPointCloud& cloud, FormKind kind);

double form_energy(const GraphDirichletForm& form, const ScalarField& f);
/// 1/2 sum c_xy (f_x - f_y)(g_x - g_y)
double bilinear(const GraphDirichletForm& form, const ScalarField& f, const ScalarField& g);

struct EnergyMeasure {
  std::vector<double> density;  // Gamma(f,f)(x) = 1/2 sum_y c_xy (f_x - f_y)^2
  double total = 0.0;

  double mass(std::span<const PointId> ids) const;
};

EnergyMeasure energy_measure(const GraphDirichletForm& form, const ScalarField& f);

/// Minimizer of the form energy with prescribed values on `boundary` (sparse Cholesky).
ScalarField harmonic_extension(const GraphDirichletForm& form, std::span<const PointId> boundary,
                               std::span<const double> values);

/// Harmonic field on a gasket cloud from its three corner values, by the 1/5-2/5 rule.
ScalarField gasket_harmonic(const MeasuredPointCloud& gasket, const std::array<double, 3>& corners);

/// Eigenpairs of L in ascending order, mu-orthonormal.
struct Spectrum {
  const MeasuredPointCloud* cloud = nullptr;
  std::vector<double> eigenvalues;
  Eigen::MatrixXd vectors;  // n x k, column k is u_k
  double max_residual = 0.0;  // max_k ||L u_k - lambda_k u_k||_mu
  bool partial = false;

  std::size_t count() const { return eigenvalues.size(); }
  ScalarField eigenfield(std::size_t k) const;
};

/// Dense eigensolve when n <= dense_limit, otherwise shift-invert subspace iteration for the
/// k_max lowest pairs. Throws std::runtime_error when the iteration does not converge.
Spectrum spectrum(const GraphDirichletForm& form, std::size_t k_max, std::size_t dense_limit = 5000);

/// p_t(x,y) = sum_k exp(-lambda_k t) u_k(x) u_k(y). Throws for t <= 0.
double heat_kernel(const Spectrum& spec, double t, PointId x, PointId y);

struct HeatFitOptions {
  double t_lo = 0.0;          // 0 selects 20 / lambda_max
  double t_hi = 0.0;          // 0 selects 0.2 / lambda_1
  int n_times = 12;
  std::size_t n_sources = 24;
  double tail_floor = 1e-9;   // pairs with p_t(x,y) <= tail_floor * p_t(x,x) are skipped
  std::uint64_t seed = 7;
  // When set, only pairs whose distance equals their shortest edge-path length are sampled.
  // On the gasket this drops pairs across a hole, where the cloud metric understates the walk.
  const GraphDirichletForm* straight_pairs = nullptr;
};

struct HeatKernelFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double beta = 0.0;     // fitted exponent of the off-diagonal decay
  double d_w_fit = 0.0;  // from mean squared displacement ~ t^{2/d_w}
  double d_s_fit = 0.0;  // from the trace sum_k exp(-lambda_k t) - 1 ~ t^{-d_s/2}
  double residual = 0.0; // max abs misfit of the log-scale model
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t samples = 0;
  bool straight_pairs = false;
};

/// Fits log p_t(x,y) + log V = log c1 - c2 (d(x,y)/t^{1/d_w})^beta over geometric times in
/// [t_lo, t_hi] and all pairs from seeded sources (Euclidean clouds). V is the geometric mean of
/// mu(B(x, t^{1/d_w})) and mu(B(y, t^{1/d_w})), so that boundary targets such as the gasket
/// corners, whose balls are light, are normalized by their own volume.
HeatKernelFit fit_subgaussian(const Spectrum& spec, const HeatFitOptions& opts = {});

/// d_w_hat = log(l_m / l_{m+1}) / log(h_m / h_{m+1}) from mesh-intrinsic first eigenvalues
/// l = lambda_1 mean(mu) / renorm; lambda_2, lambda_3 give the residual. Throws
/// std::invalid_argument unless the forms are consecutive levels of one hierarchy.
WalkDimFit eigen_walk_dimension(const GraphDirichletForm& coarse, const GraphDirichletForm& fine);

struct IntrinsicMetricResult {
  double lower = 0.0;      // f(x) - f(y) of a strictly feasible f
  double gap_bound = 0.0;  // barrier duality gap bound: d <= lower + gap_bound
  double path_bound = 0.0; // shortest path with edge lengths sqrt(2 min(mu_a, mu_b) / c)
  int newton_steps = 0;
};

/// sup { f(x) - f(y) : Gamma(f,f)(z) <= mu_z for all z }, by a log-barrier interior-point
/// method. `iterations` caps the barrier updates.
IntrinsicMetricResult intrinsic_metric(const GraphDirichletForm& form, PointId x, PointId y,
                                       int iterations = 40);

struct GammaLipReport {
  double c_best = 0.0;
  std::size_t vertices_used = 0;
};

/// max over vertices with Lip_h f > 0 of (Gamma(f,f)(x) / mu_x) / (Lip_h f(x))^2. Grid forms only.
GammaLipReport gamma_vs_lip_check(const GraphDirichletForm& form, const ScalarField& f, double r_loc);

}  // namespace kslab
