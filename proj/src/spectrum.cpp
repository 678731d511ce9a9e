#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "kslab/graphform.hpp"
#include "kslab/stats.hpp"

namespace kslab {

namespace {

Eigen::SparseMatrix<double> stiffness(const GraphDirichletForm& form) {
  const auto n = static_cast<long>(form.size());
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> diag(form.size(), 0.0);
  for (const Edge& e : form.edges()) {
    trip.emplace_back(e.a, e.b, -e.c);
    trip.emplace_back(e.b, e.a, -e.c);
    diag[e.a] += e.c;
    diag[e.b] += e.c;
  }
  for (long i = 0; i < n; ++i) trip.emplace_back(i, i, diag[static_cast<std::size_t>(i)]);
  Eigen::SparseMatrix<double> k(n, n);
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

Eigen::VectorXd measure(const GraphDirichletForm& form) {
  const auto w = form.cloud().weights();
  return Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<long>(w.size()));
}

// Sign convention: the entry of largest magnitude (first on ties) is positive.
void fix_signs(Eigen::MatrixXd& u) {
  for (long k = 0; k < u.cols(); ++k) {
    long arg = 0;
    u.col(k).cwiseAbs().maxCoeff(&arg);
    if (u(arg, k) < 0.0) u.col(k) = -u.col(k);
  }
}

double max_residual(const Eigen::SparseMatrix<double>& k, const Eigen::VectorXd& mu,
                    const std::vector<double>& lambda, const Eigen::MatrixXd& u) {
  const Eigen::MatrixXd ku = k * u;
  double worst = 0.0;
  for (long j = 0; j < u.cols(); ++j) {
    const Eigen::VectorXd r = ku.col(j).cwiseQuotient(mu) - lambda[static_cast<std::size_t>(j)] * u.col(j);
    worst = std::max(worst, std::sqrt((mu.array() * r.array().square()).sum()));
  }
  return worst;
}

Spectrum dense_spectrum(const GraphDirichletForm& form, std::size_t k_max) {
  const Eigen::SparseMatrix<double> k = stiffness(form);
  const Eigen::VectorXd mu = measure(form);
  const Eigen::VectorXd inv_sqrt = mu.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd a = inv_sqrt.asDiagonal() * Eigen::MatrixXd(k) * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: dense eigensolver failed");
  const auto kk = static_cast<long>(k_max);
  Spectrum sp;
  sp.cloud = &form.cloud();
  sp.vectors = inv_sqrt.asDiagonal() * es.eigenvectors().leftCols(kk);
  fix_signs(sp.vectors);
  for (long j = 0; j < kk; ++j) sp.eigenvalues.push_back(std::max(0.0, es.eigenvalues()[j]));
  sp.max_residual = max_residual(k, mu, sp.eigenvalues, sp.vectors);
  return sp;
}

Spectrum partial_spectrum(const GraphDirichletForm& form, std::size_t k_max) {
  const Eigen::SparseMatrix<double> k = stiffness(form);
  const Eigen::VectorXd mu = measure(form);
  const auto n = static_cast<long>(form.size());
  const long want = static_cast<long>(k_max);
  const long block = std::min<long>(n, want + std::max<long>(10, want / 4));

  // Small positive shift keeps K + sigma M definite.
  const double sigma = 1e-6 * k.diagonal().cwiseQuotient(mu).maxCoeff();
  Eigen::SparseMatrix<double> b = k;
  for (long i = 0; i < n; ++i) b.coeffRef(i, i) += sigma * mu[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(b);
  if (solver.info() != Eigen::Success) throw std::runtime_error("spectrum: shifted factorization failed");

  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd x(n, block);
  for (long j = 0; j < block; ++j) {
    for (long i = 0; i < n; ++i) x(i, j) = gauss(rng);
  }
  Spectrum sp;
  sp.cloud = &form.cloud();
  sp.partial = true;
  for (int it = 0; it < 1000; ++it) {
    const Eigen::MatrixXd y = solver.solve(mu.asDiagonal() * x);
    const Eigen::MatrixXd kr = y.transpose() * (k * y);
    const Eigen::MatrixXd mr = y.transpose() * (mu.asDiagonal() * y);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(kr, mr);
    if (ges.info() != Eigen::Success) throw std::runtime_error("spectrum: Rayleigh-Ritz step failed");
    x = y * ges.eigenvectors();
    sp.eigenvalues.assign(ges.eigenvalues().data(), ges.eigenvalues().data() + want);
    for (double& l : sp.eigenvalues) l = std::max(0.0, l);
    sp.vectors = x.leftCols(want);
    sp.max_residual = max_residual(k, mu, sp.eigenvalues, sp.vectors);
    const double scale = std::max(1.0, sp.eigenvalues.back());
    if (sp.max_residual <= 1e-10 * scale) {
      fix_signs(sp.vectors);
      return sp;
    }
  }
  throw std::runtime_error("spectrum: subspace iteration did not converge");
}

}  // namespace

ScalarField Spectrum::eigenfield(std::size_t k) const {
  if (k >= count()) throw std::out_of_range("Spectrum::eigenfield: index beyond k_max");
  const auto col = vectors.col(static_cast<long>(k));
  return ScalarField(*cloud, std::vector<double>(col.data(), col.data() + col.size()));
}

Spectrum spectrum(const GraphDirichletForm& form, std::size_t k_max, std::size_t dense_limit) {
  const std::size_t n = form.size();
  if (k_max == 0 || k_max > n) throw std::invalid_argument("spectrum: k_max must be in [1, n]");
  if (!form.connected()) throw std::invalid_argument("spectrum: form is not connected");
  if (n <= dense_limit) return dense_spectrum(form, k_max);
  return partial_spectrum(form, k_max);
}

double heat_kernel(const Spectrum& spec, double t, PointId x, PointId y) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: t must be positive");
  double s = 0.0;
  for (std::size_t k = 0; k < spec.count(); ++k) {
    const auto kk = static_cast<long>(k);
    s += std::exp(-spec.eigenvalues[k] * t) * spec.vectors(x, kk) * spec.vectors(y, kk);
  }
  return s;
}

namespace {

std::vector<double> edge_path_lengths(const GraphDirichletForm& form, PointId source) {
  const MeasuredPointCloud& cloud = form.cloud();
  std::vector<double> dist(form.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, PointId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, a] = heap.top();
    heap.pop();
    if (d > dist[a]) continue;
    for (const auto& nb : form.neighbors(a)) {
      const double nd = d + cloud.distance(a, nb.y);
      if (nd < dist[nb.y]) {
        dist[nb.y] = nd;
        heap.push({nd, nb.y});
      }
    }
  }
  return dist;
}

}  // namespace

HeatKernelFit fit_subgaussian(const Spectrum& spec, const HeatFitOptions& opts) {
  const MeasuredPointCloud& cloud = *spec.cloud;
  if (!cloud.euclidean()) throw std::invalid_argument("fit_subgaussian: needs a Euclidean cloud");
  if (spec.count() < 3) throw std::invalid_argument("fit_subgaussian: spectrum too short");
  HeatKernelFit fit;
  fit.t_lo = opts.t_lo > 0.0 ? opts.t_lo : 20.0 / spec.eigenvalues.back();
  fit.t_hi = opts.t_hi > 0.0 ? opts.t_hi : 0.2 / spec.eigenvalues[1];
  if (!(fit.t_hi > fit.t_lo) || opts.n_times < 3) throw std::invalid_argument("fit_subgaussian: degenerate time window");

  const auto n = static_cast<long>(cloud.size());
  std::vector<double> times(static_cast<std::size_t>(opts.n_times));
  for (int j = 0; j < opts.n_times; ++j) {
    times[static_cast<std::size_t>(j)] =
        fit.t_lo * std::pow(fit.t_hi / fit.t_lo, static_cast<double>(j) / (opts.n_times - 1));
  }

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<long> pick(0, n - 1);
  std::vector<PointId> sources;
  for (std::size_t i = 0; i < std::min<std::size_t>(opts.n_sources, cloud.size()); ++i) {
    sources.push_back(static_cast<PointId>(pick(rng)));
  }

  // Shortest edge-path lengths from each source, for the straight-pair filter.
  std::vector<std::vector<double>> path(sources.size());
  if (opts.straight_pairs != nullptr) {
    if (&opts.straight_pairs->cloud() != &cloud) throw std::invalid_argument("fit_subgaussian: form lives on another cloud");
    fit.straight_pairs = true;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(sources.size()); ++i) {
      path[static_cast<std::size_t>(i)] = edge_path_lengths(*opts.straight_pairs, sources[static_cast<std::size_t>(i)]);
    }
  }

  // Heat profiles p_t(x, .) for every (time, source).
  const Eigen::Map<const Eigen::VectorXd> lam(spec.eigenvalues.data(), static_cast<long>(spec.count()));
  std::vector<Eigen::VectorXd> prof(times.size() * sources.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(prof.size()); ++idx) {
    const double t = times[static_cast<std::size_t>(idx) / sources.size()];
    const PointId x = sources[static_cast<std::size_t>(idx) % sources.size()];
    const Eigen::VectorXd coef = (-t * lam.array()).exp().matrix().cwiseProduct(spec.vectors.row(x).transpose());
    prof[static_cast<std::size_t>(idx)] = spec.vectors * coef;
  }

  // Spectral dimension from the trace, walk dimension from the mean squared displacement.
  std::vector<double> lt, lz, lmsd;
  for (std::size_t j = 0; j < times.size(); ++j) {
    double z = 0.0;
    for (std::size_t k = 1; k < spec.count(); ++k) z += std::exp(-spec.eigenvalues[k] * times[j]);
    double msd = 0.0;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const Eigen::VectorXd& p = prof[j * sources.size() + i];
      double acc = 0.0;
      for (long y = 0; y < n; ++y) {
        const double d = cloud.distance(sources[i], static_cast<PointId>(y));
        acc += cloud.weight(static_cast<PointId>(y)) * p[y] * d * d;
      }
      msd += acc / static_cast<double>(sources.size());
    }
    lt.push_back(std::log(times[j]));
    lz.push_back(std::log(z));
    lmsd.push_back(std::log(msd));
  }
  fit.d_s_fit = -2.0 * fit_line(lt, lz).slope;
  const double msd_slope = fit_line(lt, lmsd).slope;
  if (!(msd_slope > 0.0)) throw std::runtime_error("fit_subgaussian: displacement does not grow");
  fit.d_w_fit = 2.0 / msd_slope;

  // Samples (u, z) with u = d / t^{1/d_w}, z = log p + log sqrt(mu(B(x, .)) mu(B(y, .))).
  std::vector<double> us, zs;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double len = std::pow(times[j], 1.0 / fit.d_w_fit);
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const PointId x = sources[i];
      const Eigen::VectorXd& p = prof[j * sources.size() + i];
      const double vol = std::log(cloud.ball_mass(x, len));
      const double floor = opts.tail_floor * p[x];
      for (long y = 0; y < n; ++y) {
        if (!(p[y] > floor)) continue;
        const double d = cloud.distance(x, static_cast<PointId>(y));
        if (fit.straight_pairs && path[i][static_cast<std::size_t>(y)] > d * (1.0 + 1e-9) + 1e-12) continue;
        us.push_back(d / len);
        zs.push_back(std::log(p[y]) + 0.5 * (vol + std::log(cloud.ball_mass(static_cast<PointId>(y), len))));
      }
    }
  }
  fit.samples = us.size();
  if (fit.samples < 10) throw std::runtime_error("fit_subgaussian: too few usable samples");

  double best_sse = std::numeric_limits<double>::infinity();
  for (int b = 0; b <= 300; ++b) {
    const double beta = 1.0 + 0.01 * b;
    std::vector<double> v(us.size());
    for (std::size_t i = 0; i < us.size(); ++i) v[i] = -std::pow(us[i], beta);
    const LinearFit lf = fit_line(v, zs);
    if (!(lf.slope > 0.0)) continue;
    double sse = 0.0;
    for (std::size_t i = 0; i < us.size(); ++i) {
      const double r = zs[i] - (lf.intercept + lf.slope * v[i]);
      sse += r * r;
    }
    if (sse < best_sse) {
      best_sse = sse;
      fit.beta = beta;
      fit.c2 = lf.slope;
      fit.c1 = std::exp(lf.intercept);
      fit.residual = lf.max_abs_residual;
    }
  }
  if (!std::isfinite(best_sse)) throw std::runtime_error("fit_subgaussian: no decaying fit found");
  return fit;
}

WalkDimFit eigen_walk_dimension(const GraphDirichletForm& coarse, const GraphDirichletForm& fine) {
  if (&coarse == &fine || coarse.kind() != fine.kind() || coarse.kind() == FormKind::custom) {
    throw std::invalid_argument("eigen_walk_dimension: need two levels of one built-in hierarchy");
  }
  const double hr = coarse.cloud().mesh() / fine.cloud().mesh();
  const bool consecutive = coarse.kind() == FormKind::gasket ? fine.level() == coarse.level() + 1
                                                              : (hr > 1.9 && hr < 2.1);
  if (!consecutive) throw std::invalid_argument("eigen_walk_dimension: levels are not consecutive");

  // Four pairs only: the iterative solver beats a full dense solve beyond a few hundred points.
  const Spectrum sc = spectrum(coarse, 4, 400);
  const Spectrum sf = spectrum(fine, 4, 400);
  const auto intrinsic = [](const GraphDirichletForm& f, double lambda) {
    return lambda * (f.cloud().total_mass() / static_cast<double>(f.size())) / f.renorm();
  };
  WalkDimFit fit;
  fit.method = WalkDimMethod::eigen_ratio;
  fit.r_lo = fine.cloud().mesh();
  fit.r_hi = coarse.cloud().mesh();
  for (std::size_t k = 1; k <= 3; ++k) {
    const double ratio = intrinsic(coarse, sc.eigenvalues[k]) / intrinsic(fine, sf.eigenvalues[k]);
    fit.per_field.push_back(std::log(ratio) / std::log(hr));
  }
  fit.d_w_hat = fit.per_field[0];
  for (double e : fit.per_field) fit.residual = std::max(fit.residual, std::abs(e - fit.d_w_hat));
  if (!(fit.d_w_hat > 0.0)) throw std::runtime_error("eigen_walk_dimension: nonpositive estimate");
  return fit;
}

}  // namespace kslab
