// Acceptance suite: one line per criterion, nonzero exit if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kslab/convergence.hpp"
#include "kslab/energy.hpp"
#include "kslab/graphform.hpp"
#include "kslab/poincare.hpp"
#include "kslab/smoothing.hpp"
#include "kslab/space.hpp"

using namespace kslab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED[" << what << "]";
    }
  }
};

constexpr double kPi = std::numbers::pi;
const double kGasketDw = std::log(5.0) / std::log(2.0);

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

// Clouds, forms and spectra shared between criteria.
struct Cache {
  std::map<std::string, std::unique_ptr<MeasuredPointCloud>> clouds;
  std::map<std::string, std::unique_ptr<GraphDirichletForm>> forms;
  std::map<std::string, std::unique_ptr<Spectrum>> spectra;

  const MeasuredPointCloud& cloud(const SpaceSpec& s) {
    auto& slot = clouds[s.describe()];
    if (!slot) slot = std::make_unique<MeasuredPointCloud>(build_cloud(s));
    return *slot;
  }
  const GraphDirichletForm& form(const SpaceSpec& s, FormKind k) {
    auto& slot = forms[s.describe()];
    if (!slot) slot = std::make_unique<GraphDirichletForm>(build_form(cloud(s), k));
    return *slot;
  }
  const Spectrum& spec(const SpaceSpec& s, FormKind k, std::size_t k_max) {
    auto& slot = spectra[s.describe() + "/" + std::to_string(k_max)];
    if (!slot) slot = std::make_unique<Spectrum>(spectrum(form(s, k), k_max));
    return *slot;
  }
};

Cache cache;

double gasket_dw() {
  static const double dw = eigen_walk_dimension(cache.form(SpaceSpec::gasket(4), FormKind::gasket),
                                                cache.form(SpaceSpec::gasket(5), FormKind::gasket))
                               .d_w_hat;
  return dw;
}

ScalarField coord_field(const MeasuredPointCloud& c, std::function<double(double)> fn) {
  return ScalarField::from_coords(c, [&](std::span<const double> p) { return fn(p[0]); });
}

// 1. Fitted limit of E(f, .) on the unit interval against (1/3) int f'^2.
void ks_limit_calibration(Outcome& o) {
  const auto& c = cache.cloud(SpaceSpec::interval(2001));
  const ScaleGrid grid = ScaleGrid::standard(c);
  struct Case {
    const char* name;
    std::function<double(double)> f;
    double target;
  };
  const Case cases[] = {{"x", [](double x) { return x; }, 1.0 / 3.0},
                        {"x^2", [](double x) { return x * x; }, 4.0 / 9.0},
                        {"sin", [](double x) { return std::sin(kPi * x); }, kPi * kPi / 6.0}};
  for (const Case& k : cases) {
    const EnergySweep s = energy_sweep(coord_field(c, k.f), 2.0, Region::all(), grid);
    const double rel = s.fitted_limit / k.target - 1.0;
    o.detail << " " << k.name << ":" << s.fitted_limit << " (" << 100.0 * rel << "%)";
    o.require(std::abs(rel) <= 0.05, k.name);
  }
}

// 2. E(x, 0.05) on the unit square against r^2/4 / r^2 = 1/4.
void square_calibration(Outcome& o) {
  const auto& c = cache.cloud(SpaceSpec::square(201));
  const double e = ks_energy(ScalarField::from_coords(c, [](auto p) { return p[0]; }), 0.05, 2.0);
  o.detail << " E=" << e << " (" << 100.0 * (e / 0.25 - 1.0) << "%)";
  o.require(std::abs(e / 0.25 - 1.0) <= 0.10, "within 10% of 1/4");
}

// 3. Volume doubling.
void doubling(Outcome& o) {
  {
    const auto& c = cache.cloud(SpaceSpec::interval(2001));
    const auto scales = ScaleGrid::standard(c).admissible(c);
    const double cd = estimate_doubling(c, 200, scales, 3).doubling_constant;
    o.detail << " interval C_D=" << cd;
    o.require(cd <= 2.1, "interval C_D <= 2.1");
  }
  {
    const auto& c = cache.cloud(SpaceSpec::square(201));
    ScaleGrid g;
    g.r_max = 0.125;
    g.count = 8;
    const auto interior = interior_points(c, 0.25);
    const double cd = estimate_doubling(c, 200, g.admissible(c), 3, interior).doubling_constant;
    o.detail << " square C_D=" << cd;
    o.require(cd <= 4.4, "square C_D <= 4.4");
  }
  std::vector<double> cds;
  for (int m : {5, 6}) {
    const auto& c = cache.cloud(SpaceSpec::gasket(m));
    cds.push_back(estimate_doubling(c, 200, ScaleGrid::standard(c).admissible(c), 3).doubling_constant);
    o.detail << " gasket(" << m << ") C_D=" << cds.back();
  }
  o.require(spread(cds) <= 1.2, "gasket C_D stable within 20%");
}

// 4. Comparability ratio sup E / liminf E.
void comparability(Outcome& o) {
  const auto& c = cache.cloud(SpaceSpec::interval(2001));
  const double q = comparability_ratio(
      energy_sweep(coord_field(c, [](double x) { return x; }), 2.0, Region::all(), ScaleGrid::standard(c)));
  o.detail << " interval x: " << q;
  o.require(q <= 1.05, "interval ratio <= 1.05");
  for (std::size_t k = 1; k <= 3; ++k) {
    std::vector<double> qs;
    for (int m : {5, 6}) {
      const auto& g = cache.cloud(SpaceSpec::gasket(m));
      const Spectrum& s = cache.spec(SpaceSpec::gasket(m), FormKind::gasket, g.size());
      qs.push_back(comparability_ratio(
          energy_sweep(s.eigenfield(k), gasket_dw(), Region::all(), ScaleGrid::standard(g))));
    }
    o.detail << " u" << k << ": " << qs[0] << "->" << qs[1];
    o.require(finite_positive(qs[0]) && finite_positive(qs[1]) && spread(qs) <= 2.0, "gasket u" + std::to_string(k));
  }
}

// 5. Mollifier estimates on the interval. The constant at each eps is the worst ratio over a
// small field family; both constants must stay within a factor 2 across eps.
void mollifier(Outcome& o) {
  const auto& c = cache.cloud(SpaceSpec::interval(2001));
  const std::vector<ScalarField> family{coord_field(c, [](double x) { return x; }),
                                        coord_field(c, [](double x) { return x * x; }),
                                        coord_field(c, [](double x) { return std::sin(kPi * x); }),
                                        coord_field(c, [](double x) { return x >= 0.5 ? 1.0 : 0.0; })};
  std::vector<double> lip, l2;
  std::vector<std::vector<double>> errors(family.size());
  for (double eps : {0.1, 0.05, 0.025}) {
    const PartitionOfUnity pou(c, build_net(c, eps));
    double worst_lip = 0.0, worst_l2 = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i) {
      const MollifierReport r = mollifier_estimates(family[i], eps);
      worst_lip = std::max(worst_lip, r.lip_bound_ratio);
      worst_l2 = std::max(worst_l2, r.l2_bound_ratio);
      errors[i].push_back((mollify(family[i], pou) - family[i]).l2_norm());
    }
    lip.push_back(worst_lip);
    l2.push_back(worst_l2);
    o.detail << " eps=" << eps << ":(" << worst_lip << "," << worst_l2 << ")";
  }
  o.require(std::all_of(lip.begin(), lip.end(), finite_positive) && spread(lip) <= 2.0, "lip ratio stable");
  o.require(std::all_of(l2.begin(), l2.end(), finite_positive) && spread(l2) <= 2.0, "l2 ratio stable");
  for (const auto& e : errors) o.require(e[0] > e[1] && e[1] > e[2], "||f_eps - f|| strictly decreasing");
}

// 6. Controlled cutoff quotients across two dyadic eps.
void cutoff(Outcome& o) {
  struct Case {
    SpaceSpec space;
    double d_w;
    double eps0;
  };
  const Case cases[] = {{SpaceSpec::interval(2001), 2.0, 0.1}, {SpaceSpec::gasket(5), gasket_dw(), 0.125}};
  for (const Case& k : cases) {
    const auto& c = cache.cloud(k.space);
    std::vector<double> worst;
    for (double eps : {k.eps0, k.eps0 / 2}) {
      const PartitionOfUnity pou(c, build_net(c, eps));
      worst.push_back(check_controlled_cutoff(pou, k.d_w, ScaleGrid::standard(c)).worst);
    }
    o.detail << " " << k.space.describe() << ": " << worst[0] << "->" << worst[1];
    o.require(finite_positive(worst[0]) && finite_positive(worst[1]) && spread(worst) <= 4.0,
              k.space.describe() + " within factor 4");
  }
}

// 7. Poincare constants in the three flavours.
void poincare(Outcome& o) {
  const auto& c = cache.cloud(SpaceSpec::interval(2001));
  const ScalarField x = coord_field(c, [](double t) { return t; });
  {
    // Interior balls, lambda = 1: ratio -> (2R^3/3) / (2R^3) = 1/3.
    std::vector<double> radii;
    for (double r : ScaleGrid::standard(c).admissible(c)) radii.push_back(r);
    std::vector<BallSample> balls;
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<PointId> pick(0, static_cast<PointId>(c.size() - 1));
    while (balls.size() < 50 * radii.size()) {
      const PointId p = pick(rng);
      for (double r : radii) {
        if (c.coord(p, 0) - r > 0.0 && c.coord(p, 0) + r < 1.0) balls.push_back({p, r});
      }
    }
    PoincareOptions opt;
    opt.lambda = 1.0;
    const PoincareReport lip = poincare_check(x, PoincareMode::lip, 2.0, balls, opt);
    double lo = 1.0;
    for (const auto& s : lip.samples) lo = std::min(lo, s.ratio);
    o.detail << " lip ratio in [" << lo << "," << lip.c_best << "]";
    o.require(std::abs(lip.c_best * 3.0 - 1.0) <= 0.1 && std::abs(lo * 3.0 - 1.0) <= 0.1, "lip ratio 1/3 +- 10%");
    const PoincareReport ks = poincare_check(x, PoincareMode::ks, 2.0, balls, opt);
    o.detail << " ks C=" << ks.c_best;
    o.require(finite_positive(ks.c_best), "ks finite");
  }
  std::vector<double> cs;
  for (int m : {5, 6}) {
    const auto& g = cache.cloud(SpaceSpec::gasket(m));
    const ScalarField h = gasket_harmonic(g, {1.0, 0.0, 0.0});
    const auto radii = default_radii(g, 2.0);
    const auto balls = sample_balls(g, 50, radii, 9);
    PoincareOptions opt;
    opt.form = &cache.form(SpaceSpec::gasket(m), FormKind::gasket);
    cs.push_back(poincare_check(h, PoincareMode::energy_measure, gasket_dw(), balls, opt).c_best);
    o.detail << " gasket(" << m << ") energy-measure C=" << cs.back();
  }
  o.require(finite_positive(cs[0]) && finite_positive(cs[1]) && spread(cs) <= 2.0, "energy measure stable");
}

// 8. Weak-L2 bound of the maximal function across two resolutions.
void maximal(Outcome& o) {
  const std::vector<double> thresholds{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.55, 0.6, 0.8, 1.0, 2.0};
  std::vector<double> q;
  for (int n : {401, 801}) {
    const auto& c = cache.cloud(SpaceSpec::interval(n));
    const MaximalField m = maximal_function(coord_field(c, [](double t) { return t; }), 0.25, 2.0,
                                            ScaleGrid::standard(c));
    q.push_back(weak_l2_check(m, thresholds).max_quotient);
    o.detail << " n=" << n << ": " << q.back();
  }
  o.require(finite_positive(q[0]) && finite_positive(q[1]) && spread(q) <= 2.0, "within factor 2");
}

// 9. Walk and spectral dimension from three methods.
void walk_dimension(Outcome& o) {
  const double eig = gasket_dw();
  o.detail << " eigen(4->5)=" << eig;
  o.require(std::abs(eig - kGasketDw) <= 0.05, "eigen ratio within 0.05");
  const auto& g = cache.cloud(SpaceSpec::gasket(6));
  std::vector<ScalarField> fields;
  for (const auto& corners : {std::array<double, 3>{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, -1, 0}}) {
    fields.push_back(gasket_harmonic(g, corners));
  }
  const WalkDimFit ks = fit_walk_dimension(fields, ScaleGrid::standard(g));
  o.detail << " ks(gasket 6)=" << ks.d_w_hat;
  o.require(std::abs(ks.d_w_hat - eig) <= 0.15, "ks fit within 0.15 of eigen ratio");
  const Spectrum& s = cache.spec(SpaceSpec::gasket(6), FormKind::gasket, g.size());
  const double ds_half = fit_subgaussian(s).d_s_fit / 2.0;
  o.detail << " d_s/2=" << ds_half;
  o.require(std::abs(ds_half - std::log(3.0) / std::log(5.0)) <= 0.05, "d_s/2 within 0.05");
}

// 10. Sub-Gaussian heat kernel fit.
void subgaussian(Outcome& o) {
  const auto& g = cache.cloud(SpaceSpec::gasket(6));
  const Spectrum& s = cache.spec(SpaceSpec::gasket(6), FormKind::gasket, g.size());
  HeatFitOptions opt;
  opt.straight_pairs = &cache.form(SpaceSpec::gasket(6), FormKind::gasket);
  const HeatKernelFit fit = fit_subgaussian(s, opt);
  const double expected = fit.d_w_fit / (fit.d_w_fit - 1.0);
  o.detail << " residual=" << fit.residual << " beta=" << fit.beta << " d_w/(d_w-1)=" << expected
           << " samples=" << fit.samples;
  o.require(fit.residual <= 1.0, "residual <= 1");
  o.require(std::abs(fit.beta - expected) <= 0.2, "exponent within 0.2");
}

// 11. Intrinsic metric.
void intrinsic(Outcome& o) {
  for (int n_edges : {4, 10}) {
    std::vector<double> xs, ws(static_cast<std::size_t>(n_edges + 1), 1.0);
    std::vector<Edge> edges;
    for (int i = 0; i <= n_edges; ++i) xs.push_back(i);
    for (int i = 0; i < n_edges; ++i) edges.push_back({static_cast<PointId>(i), static_cast<PointId>(i + 1), 1.0});
    const MeasuredPointCloud path(1, xs, ws, 1.0, SpaceSpec::interval(n_edges + 1));
    const GraphDirichletForm form(path, edges);
    const auto d = intrinsic_metric(form, 0, static_cast<PointId>(n_edges));
    o.detail << " path N=" << n_edges << ": " << d.lower;
    o.require(std::abs(d.lower / n_edges - 1.0) <= 0.01, "path graph d = N");
  }
  std::vector<double> ratios;
  for (int n : {101, 201}) {
    const auto& c = cache.cloud(SpaceSpec::interval(n));
    const auto d = intrinsic_metric(cache.form(SpaceSpec::interval(n), FormKind::grid1d), 0,
                                    static_cast<PointId>(n - 1));
    ratios.push_back(d.lower / c.distance(0, static_cast<PointId>(n - 1)));
    o.detail << " grid1d n=" << n << ": " << ratios.back();
  }
  o.require(finite_positive(ratios[0]) && spread(ratios) <= 2.0, "bi-Lipschitz ratio stable");
}

// 12. Energy measure against the discrete Lipschitz slope.
void gamma_lip(Outcome& o) {
  {
    const auto& c = cache.cloud(SpaceSpec::interval(401));
    const auto r = gamma_vs_lip_check(cache.form(SpaceSpec::interval(401), FormKind::grid1d),
                                      coord_field(c, [](double t) { return t; }), c.admissible_floor());
    o.detail << " x: " << r.c_best;
    o.require(std::abs(r.c_best - 1.0) <= 0.1, "C_best = 1 +- 10%");
  }
  std::vector<double> cs;
  for (int n : {401, 801}) {
    const auto& c = cache.cloud(SpaceSpec::interval(n));
    cs.push_back(gamma_vs_lip_check(cache.form(SpaceSpec::interval(n), FormKind::grid1d),
                                    coord_field(c, [](double t) { return std::sin(kPi * t); }),
                                    c.admissible_floor())
                     .c_best);
    o.detail << " sin n=" << n << ": " << cs.back();
  }
  o.require(finite_positive(cs[0]) && spread(cs) <= 2.0, "stable across resolutions");
}

// 13. Total boundedness of a band-limited family.
void compactness(Outcome& o) {
  const auto& g = cache.cloud(SpaceSpec::gasket(5));
  const Spectrum& s = cache.spec(SpaceSpec::gasket(5), FormKind::gasket, g.size());
  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal;
  std::vector<ScalarField> fields;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> a(21, 0.0);
    double energy = 0.0;
    for (std::size_t k = 1; k <= 20; ++k) {
      a[k] = normal(rng);
      energy += s.eigenvalues[k] * a[k] * a[k];
    }
    ScalarField f = ScalarField::constant(g, 0.0);
    for (std::size_t k = 1; k <= 20; ++k) f = f + s.eigenfield(k) * (a[k] / std::sqrt(energy));
    fields.push_back(std::move(f));
  }
  double cap = 0.0;
  const ScaleGrid grid = ScaleGrid::standard(g);
  for (const auto& f : fields) {
    cap = std::max(cap, f.l2_norm_squared() + energy_sweep(f, gasket_dw(), Region::all(), grid).liminf_proxy);
  }
  const CompactnessProbe p = compactness_probe(fields, gasket_dw(), cap, 0.1, grid);
  o.detail << " net=" << p.net_size << "/" << p.family_size << " cap=" << cap;
  o.require(p.net_size <= 25, "net size <= 25");
}

// 14. Recovery and liminf margins.
void mosco(Outcome& o) {
  struct Case {
    std::string name;
    const MeasuredPointCloud* cloud;
    const GraphDirichletForm* form;
    const Spectrum* spec;
    ScalarField f;
    double d_w;
    std::vector<ScalePair> pairs;
  };
  const SpaceSpec line = SpaceSpec::interval(401), gasket = SpaceSpec::gasket(6);
  const auto& lc = cache.cloud(line);
  const auto& gc = cache.cloud(gasket);
  const Spectrum& ls = cache.spec(line, FormKind::grid1d, lc.size());
  const Spectrum& gs = cache.spec(gasket, FormKind::gasket, gc.size());
  std::vector<Case> cases;
  cases.push_back({"grid sin", &lc, &cache.form(line, FormKind::grid1d), &ls,
                   coord_field(lc, [](double t) { return std::sin(kPi * t); }), 2.0,
                   {{0.05, 0.05}, {0.025, 0.025}, {0.0125, 0.0125}}});
  cases.push_back({"grid u1", &lc, &cache.form(line, FormKind::grid1d), &ls, ls.eigenfield(1), 2.0,
                   {{0.05, 0.05}, {0.025, 0.025}, {0.0125, 0.0125}}});
  cases.push_back({"gasket u1", &gc, &cache.form(gasket, FormKind::gasket), &gs, gs.eigenfield(1), gasket_dw(),
                   {{0.25, 0.125}, {0.125, 0.0884}, {0.0625, 0.0625}}});
  for (const Case& k : cases) {
    MoscoReport rep = recovery_check(k.f, k.d_w, k.pairs, form_energy(*k.form, k.f));
    std::vector<double> scales;
    for (const auto& p : k.pairs) scales.push_back(p.r);
    weak_liminf_probe(rep, k.f, k.d_w, *k.spec, scales);
    o.detail << " " << k.name << ": rec " << rep.recovery_margin << " x" << rep.recovery_spread << ", liminf "
             << rep.liminf_margin << " x" << rep.liminf_spread;
    o.require(finite_positive(rep.recovery_margin) && rep.recovery_spread <= 2.0, k.name + " recovery");
    o.require(finite_positive(rep.liminf_margin) && rep.liminf_spread <= 2.0, k.name + " liminf");
    o.require(rep.strong_trend, k.name + " strong trend");
    o.require(rep.weak_null, k.name + " weak nullity");
  }
}

// Admissible radii from the floor up to the diameter, for clouds the standard grid misses.
std::vector<double> oracle_scales(const MeasuredPointCloud& c) {
  std::vector<double> out;
  for (double r = c.admissible_floor(); r <= c.diameter() && out.size() < 4; r *= 1.5) out.push_back(r);
  return out;
}

// 15. Indexed kernels against brute force, Markov contraction and strong locality.
void oracle_equivalence(Outcome& o) {
  std::vector<const MeasuredPointCloud*> small;
  for (const SpaceSpec& s : {SpaceSpec::interval(101), SpaceSpec::interval(200), SpaceSpec::square(14),
                             SpaceSpec::gasket(3), SpaceSpec::gasket(4), SpaceSpec::carpet(1),
                             SpaceSpec::carpet(2)}) {
    const auto& c = cache.cloud(s);
    if (c.size() <= 200 && !oracle_scales(c).empty()) small.push_back(&c);
  }
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  // Random clouds: scattered planar points and an abstract metric taken from them.
  std::vector<std::unique_ptr<MeasuredPointCloud>> owned;
  for (std::size_t n : {60, 150, 200}) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<double> xy(2 * n), w(n);
    for (double& v : xy) v = u01(rng);
    for (double& v : w) v = 0.5 + u01(rng);
    std::vector<double> d(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::hypot(xy[2 * i] - xy[2 * j], xy[2 * i + 1] - xy[2 * j + 1]);
    }
    owned.push_back(std::make_unique<MeasuredPointCloud>(2, xy, w, SpaceSpec::file("random")));
    owned.push_back(std::make_unique<MeasuredPointCloud>(
        MeasuredPointCloud::from_distance_matrix(std::move(d), w, SpaceSpec::file("random-matrix"))));
  }
  for (const auto& c : owned) {
    if (!oracle_scales(*c).empty()) small.push_back(c.get());
  }
  double worst = 0.0;
  for (const MeasuredPointCloud* c : small) {
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> v(c->size());
      for (double& x : v) x = unif(rng);
      const ScalarField f(*c, v);
      for (double r : oracle_scales(*c)) {
        for (double dw : {2.0, kGasketDw}) {
          const double a = ks_energy(f, r, dw), b = reference::ks_energy_brute(f, r, dw);
          worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
        }
      }
    }
  }
  o.detail << " clouds=" << small.size() << " max rel diff=" << worst;
  o.require(worst <= 1e-12, "brute force 1e-12");

  int markov_bad = 0, locality_bad = 0;
  for (int t = 0; t < 100; ++t) {
    const MeasuredPointCloud& c = *small[static_cast<std::size_t>(t) % small.size()];
    std::vector<double> v(c.size());
    for (double& x : v) x = unif(rng);
    const ScalarField f(c, v);
    std::vector<double> tv(v);
    for (double& x : tv) x = std::clamp(x, 0.0, 1.0);
    const ScalarField tf(c, tv);
    const auto scales = oracle_scales(c);
    const double r = scales[static_cast<std::size_t>(t) % scales.size()];
    if (ks_energy(tf, r, 2.0) > ks_energy(f, r, 2.0) * (1.0 + 1e-12)) ++markov_bad;
  }
  std::uniform_int_distribution<int> level(3, 4);
  for (int t = 0; t < 100; ++t) {
    const SpaceSpec s = SpaceSpec::gasket(level(rng));
    const auto& c = cache.cloud(s);
    const GraphDirichletForm& form = cache.form(s, FormKind::gasket);
    std::uniform_int_distribution<PointId> pick(0, static_cast<PointId>(c.size() - 1));
    // g supported on one vertex's neighbourhood, f constant on the neighbourhood of supp g.
    const PointId p = pick(rng);
    std::vector<double> gv(c.size(), 0.0), fv(c.size());
    gv[p] = unif(rng);
    for (const auto& nb : form.neighbors(p)) gv[nb.y] = unif(rng);
    for (double& x : fv) x = unif(rng);
    const double k = unif(rng);
    std::vector<PointId> hood{p};
    for (const auto& nb : form.neighbors(p)) hood.push_back(nb.y);
    for (PointId a : std::vector<PointId>(hood)) {
      fv[a] = k;
      for (const auto& nb : form.neighbors(a)) fv[nb.y] = k;
    }
    const ScalarField f(c, fv), g(c, gv);
    if (std::abs(bilinear(form, f, g)) > 1e-12) ++locality_bad;
    std::vector<double> tv(fv);
    for (double& x : tv) x = std::clamp(x, 0.0, 1.0);
    if (form_energy(form, ScalarField(c, tv)) > form_energy(form, f) * (1.0 + 1e-12)) ++markov_bad;
  }
  o.detail << " markov violations=" << markov_bad << "/200 locality violations=" << locality_bad << "/100";
  o.require(markov_bad == 0, "markov contraction");
  o.require(locality_bad == 0, "strong locality");
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  void (*run)(Outcome&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "ks-limit calibration", 30, ks_limit_calibration},
      {2, "2D calibration", 60, square_calibration},
      {3, "volume doubling", 30, doubling},
      {4, "comparability", 60, comparability},
      {5, "mollifier estimates", 30, mollifier},
      {6, "controlled cutoff", 60, cutoff},
      {7, "poincare suite", 120, poincare},
      {8, "maximal function", 60, maximal},
      {9, "walk dimension", 180, walk_dimension},
      {10, "sub-gaussian fit", 120, subgaussian},
      {11, "intrinsic metric", 60, intrinsic},
      {12, "gamma vs lip", 30, gamma_lip},
      {13, "compactness probe", 60, compactness},
      {14, "mosco diagnostics", 120, mosco},
      {15, "oracle equivalence", 30, oracle_equivalence},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " EXCEPTION: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail << " FAILED[runtime budget " << c.budget_s << " s]";
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %-22s %7.2fs%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/15 criteria passed\n", 15 - failures);
  return failures == 0 ? 0 : 1;
}
