#include "suites.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kslab/convergence.hpp"
#include "kslab/io.hpp"
#include "kslab/poincare.hpp"
#include "kslab/smoothing.hpp"

namespace kslab::app {

using ojson = nlohmann::ordered_json;

namespace {

constexpr double kPi = std::numbers::pi;
const double kGasketDw = std::log(5.0) / std::log(2.0);
const double kGasketDsHalf = std::log(3.0) / std::log(5.0);
// Corner data of the harmonic fields used for the energy-scaling walk dimension on the gasket.
constexpr std::array<std::array<double, 3>, 4> kCorners{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, -1, 0}}};

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

double spread(const std::vector<double>& v) {
  if (v.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*hi == 0.0) return 1.0;
  if (!(*lo > 0.0)) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

bool is_grid(const SpaceSpec& s) { return s.kind == SpaceKind::interval_grid || s.kind == SpaceKind::square_grid; }

MeasuredPointCloud load_space(const SpaceSpec& s) {
  return s.kind == SpaceKind::file ? load_cloud_file(s.path) : build_cloud(s);
}

std::optional<SpaceSpec> coarser(const SpaceSpec& s) {
  switch (s.kind) {
    case SpaceKind::interval_grid:
    case SpaceKind::square_grid:
      // Mesh exactly doubles when n - 1 is even.
      if (s.size >= 5 && (s.size - 1) % 2 == 0) return SpaceSpec{s.kind, (s.size + 1) / 2, {}};
      return std::nullopt;
    case SpaceKind::gasket:
    case SpaceKind::carpet:
      if (s.size >= 2) return SpaceSpec{s.kind, s.size - 1, {}};
      return std::nullopt;
    case SpaceKind::file: return std::nullopt;
  }
  return std::nullopt;
}

// Scales eps_0, eps_0/2, ... used by the smoothing and convergence suites.
std::vector<double> eps_ladder(const MeasuredPointCloud& c, double start, std::size_t count) {
  std::vector<double> out;
  for (double e = start; out.size() < count; e *= 0.5) {
    if (e < 2.0 * c.mesh()) break;
    out.push_back(e);
  }
  return out;
}

double smoothing_start(const MeasuredPointCloud& c) {
  switch (c.spec().kind) {
    case SpaceKind::interval_grid:
    case SpaceKind::square_grid: return 0.1;
    case SpaceKind::gasket:
    case SpaceKind::carpet: return 0.125;
    case SpaceKind::file: return 0.1 * c.diameter();
  }
  return 0.1;
}

Table sweep_table(const std::string& name, const EnergySweep& s) {
  Table t{name, {"r", "E"}, {}};
  for (std::size_t k = 0; k < s.scales.size(); ++k) t.rows.push_back({s.scales[k], s.values[k]});
  return t;
}

Table poincare_table(const std::string& name, const PoincareReport& r) {
  Table t{name, {"center", "R", "lhs", "rhs", "ratio"}, {}};
  for (const auto& s : r.samples) t.rows.push_back({static_cast<double>(s.center), s.radius, s.lhs, s.rhs, s.ratio});
  return t;
}

// Closed forms of (1/3) int_0^1 f'^2 on the unit interval.
std::optional<double> interval_limit(const std::string& field) {
  if (field == "x") return 1.0 / 3.0;
  if (field == "x2") return 4.0 / 9.0;
  if (field == "sin") return kPi * kPi / 6.0;
  return std::nullopt;
}

const NamedField* first_nonconstant(const std::vector<NamedField>& fs) {
  for (const auto& f : fs) {
    if (!f.field.is_constant()) return &f;
  }
  return nullptr;
}

const NamedField* find_field(const std::vector<NamedField>& fs, const std::string& name) {
  for (const auto& f : fs) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

// Runs `body`, turning exceptions into a failed check.
CheckResult guarded(const std::string& suite, const std::string& id, const std::string& topic,
                    const std::function<void(CheckResult&)>& body) {
  CheckResult r;
  r.suite = suite;
  r.id = suite + "." + id;
  r.topic = topic;
  try {
    body(r);
  } catch (const InadmissibleScale& e) {
    // Not testable at this resolution (either level); reported, not failed.
    r.status = "skip";
    r.note = std::string("inadmissible: ") + e.what();
    r.tables.clear();
  } catch (const std::exception& e) {
    r.status = "fail";
    r.note = std::string("error: ") + e.what();
    r.tables.clear();
  }
  return r;
}

}  // namespace

void CheckResult::require(bool ok, const std::string& what) {
  if (ok || status == "skip") return;
  status = "fail";
  note += (note.empty() ? "" : "; ") + what;
}

void CheckResult::skip(const std::string& why) {
  status = "skip";
  note = why;
}

// ---------------------------------------------------------------------------------------------
// Context

Context::Context(const ExperimentConfig& cfg)
    : cfg_(cfg), cloud_(std::make_unique<MeasuredPointCloud>(load_space(cfg.space))) {
  resolve_d_w();
}

Context::~Context() = default;

const MeasuredPointCloud* Context::coarse() {
  if (!coarse_tried_) {
    coarse_tried_ = true;
    if (const auto s = coarser(cfg_.space)) coarse_ = std::make_unique<MeasuredPointCloud>(build_cloud(*s));
  }
  return coarse_.get();
}

std::optional<FormKind> Context::form_kind() const {
  switch (cfg_.space.kind) {
    case SpaceKind::interval_grid: return FormKind::grid1d;
    case SpaceKind::square_grid: return FormKind::grid2d;
    case SpaceKind::gasket: return FormKind::gasket;
    default: return std::nullopt;
  }
}

const GraphDirichletForm* Context::form() {
  if (!form_ && form_kind()) form_ = std::make_unique<GraphDirichletForm>(build_form(*cloud_, *form_kind()));
  return form_.get();
}

const GraphDirichletForm* Context::coarse_form() {
  if (!coarse_form_ && form_kind() && coarse()) {
    coarse_form_ = std::make_unique<GraphDirichletForm>(build_form(*coarse_, *form_kind()));
  }
  return coarse_form_.get();
}

namespace {
std::size_t spectrum_size(std::size_t n) { return n <= 5000 ? n : 60; }
}  // namespace

const Spectrum* Context::spectrum() {
  if (!spectrum_ && form()) spectrum_ = std::make_unique<Spectrum>(kslab::spectrum(*form_, spectrum_size(cloud_->size())));
  return spectrum_.get();
}

ScaleGrid Context::grid(const MeasuredPointCloud& c) const {
  ScaleGrid g = ScaleGrid::standard(c);
  if (cfg_.grid.r_max) g.r_max = *cfg_.grid.r_max;
  g.ratio = cfg_.grid.ratio;
  g.count = cfg_.grid.count;
  if (cfg_.grid.snap) g.snap = *cfg_.grid.snap;
  // A larger kappa trims the small end of the grid.
  const double floor = cfg_.grid.kappa * c.mesh();
  while (g.count > 1 && g.r_max * std::pow(g.ratio, g.count - 1) < floor * (1.0 - 1e-12)) --g.count;
  return g;
}

std::vector<std::string> default_fields(const SpaceSpec& space) {
  switch (space.kind) {
    case SpaceKind::interval_grid: return {"x", "x2", "sin", "step"};
    case SpaceKind::square_grid: return {"x", "sin", "step"};
    case SpaceKind::gasket: return {"harmonic", "harmonic2", "eigen1", "eigen2"};
    case SpaceKind::carpet: return {"x", "dist", "step"};
    case SpaceKind::file: return {"dist"};
  }
  return {"dist"};
}

ScalarField Context::make_field(const std::string& name, const MeasuredPointCloud& c, const Spectrum* spec) {
  const auto coord = [&c](PointId i) { return c.euclidean() ? c.coord(i, 0) : c.distance(0, i); };
  std::vector<double> v(c.size());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < c.size(); ++i) {
    lo = std::min(lo, coord(static_cast<PointId>(i)));
    hi = std::max(hi, coord(static_cast<PointId>(i)));
  }
  if (name == "harmonic") return gasket_harmonic(c, {1.0, 0.0, 0.0});
  if (name == "harmonic2") return gasket_harmonic(c, {1.0, -1.0, 0.0});
  if (name.rfind("eigen", 0) == 0) {
    if (spec == nullptr) throw ConfigError("field " + name + " needs a graph form");
    return spec->eigenfield(static_cast<std::size_t>(std::stoi(name.substr(5))));
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double x = coord(static_cast<PointId>(i));
    if (name == "x") {
      v[i] = x;
    } else if (name == "x2") {
      v[i] = x * x;
    } else if (name == "sin") {
      v[i] = std::sin(kPi * x);
    } else if (name == "step") {
      v[i] = x >= 0.5 * (lo + hi) ? 1.0 : 0.0;
    } else if (name == "dist") {
      v[i] = c.distance(0, static_cast<PointId>(i));
    } else if (name == "spike") {
      v[i] = 0.0;
    } else {
      throw ConfigError("unknown field " + name);
    }
  }
  if (name == "spike") v[c.size() / 2] = 1.0;
  return ScalarField(c, std::move(v));
}

std::vector<NamedField> Context::fields(const MeasuredPointCloud& c) {
  const std::vector<std::string> names = cfg_.fields.empty() ? default_fields(cfg_.space) : cfg_.fields;
  const Spectrum* spec = nullptr;
  const bool needs_spec = std::any_of(names.begin(), names.end(), [](const auto& n) { return n.rfind("eigen", 0) == 0; });
  if (needs_spec) {
    if (&c == cloud_.get()) {
      spec = spectrum();
    } else {
      if (!coarse_spectrum_ && coarse_form()) {
        coarse_spectrum_ = std::make_unique<Spectrum>(kslab::spectrum(*coarse_form_, spectrum_size(c.size())));
      }
      spec = coarse_spectrum_.get();
    }
  }
  std::vector<NamedField> out;
  for (const auto& n : names) out.push_back({n, make_field(n, c, spec)});
  return out;
}

void Context::resolve_d_w() {
  if (cfg_.d_w) {
    d_w_ = *cfg_.d_w;
    d_w_info_ = {{"value", d_w_}, {"source", "config"}};
    return;
  }
  ojson info;
  std::optional<double> eigen, ks;
  if (form() && coarse_form()) {
    eigen = eigen_walk_dimension(*coarse_form_, *form_).d_w_hat;
    info["eigen_ratio"] = *eigen;
  } else {
    info["eigen_ratio"] = nullptr;
  }
  std::vector<ScalarField> ks_fields;
  if (cfg_.space.kind == SpaceKind::gasket) {
    for (const auto& corners : kCorners) {
      ks_fields.push_back(gasket_harmonic(*cloud_, corners));
    }
  } else {
    for (auto& f : fields(*cloud_)) {
      if (!f.field.is_constant()) ks_fields.push_back(std::move(f.field));
    }
  }
  try {
    ks = fit_walk_dimension(ks_fields, grid(*cloud_), cfg_.grid.window < 3 ? 3 : cfg_.grid.window).d_w_hat;
    info["ks_scaling"] = *ks;
  } catch (const std::exception&) {
    info["ks_scaling"] = nullptr;
  }
  if (!eigen && !ks) throw ConfigError("d_w = \"fit\" but neither walk-dimension method applies to this space");
  d_w_ = std::max(2.0, eigen ? *eigen : *ks);
  info["source"] = eigen ? "eigen_ratio" : "ks_scaling";
  if (eigen && ks) {
    info["agree"] = std::abs(*eigen - *ks) <= cfg_.tol("walkdim_agree");
  } else {
    info["agree"] = nullptr;
  }
  d_w_info_ = {{"value", d_w_}};
  for (auto& [k, v] : info.items()) d_w_info_[k] = v;
}

void validate_against_space(const ExperimentConfig& cfg) {
  const std::vector<std::string> names = cfg.fields.empty() ? default_fields(cfg.space) : cfg.fields;
  for (const auto& n : names) {
    if ((n == "harmonic" || n == "harmonic2") && cfg.space.kind != SpaceKind::gasket) {
      throw ConfigError("field " + n + " is only defined on the gasket");
    }
    if (n.rfind("eigen", 0) == 0 && cfg.space.kind != SpaceKind::interval_grid &&
        cfg.space.kind != SpaceKind::square_grid && cfg.space.kind != SpaceKind::gasket) {
      throw ConfigError("field " + n + " needs a space with a built-in graph form");
    }
  }
  MeasuredPointCloud cloud = [&] {
    try {
      return load_space(cfg.space);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("space cannot be built: ") + e.what());
    }
  }();
  ScaleGrid g = ScaleGrid::standard(cloud);
  if (cfg.grid.r_max) g.r_max = *cfg.grid.r_max;
  g.ratio = cfg.grid.ratio;
  g.count = cfg.grid.count;
  const double floor = cfg.grid.kappa * cloud.mesh();
  bool any = false;
  for (double r : g.scales()) any = any || r >= floor;
  if (!any) throw ConfigError("scale grid has no scale at or above kappa * mesh");
}

// ---------------------------------------------------------------------------------------------
// Suites

namespace {

std::vector<CheckResult> doubling_suite(Context& ctx) {
  const auto& cfg = ctx.config();
  const auto& cloud = ctx.cloud();
  std::vector<CheckResult> out;

  const auto profile_for = [&](const MeasuredPointCloud& c) {
    std::vector<double> scales = ctx.grid(c).admissible(c);
    std::vector<PointId> candidates;
    if (c.spec().kind == SpaceKind::square_grid) {
      // Interior centers: the doubled ball stays inside the square.
      std::erase_if(scales, [](double r) { return 2.0 * r > 0.25; });
      candidates = interior_points(c, 0.25);
    }
    return estimate_doubling(c, cfg.doubling_centers, scales, cfg.seed, candidates);
  };

  DoublingProfile profile;
  out.push_back(guarded("doubling", "profile", "volume doubling", [&](CheckResult& r) {
    profile = profile_for(cloud);
    r.values["C_D"] = profile.doubling_constant;
    r.values["Q_fit"] = profile.q_fit;
    r.values["centers"] = cfg.doubling_centers;
    Table t{"doubling", {"center", "r", "mass_r", "mass_2r", "ratio"}, {}};
    for (const auto& s : profile.samples) {
      t.rows.push_back({static_cast<double>(s.center), s.r, s.mass_r, s.mass_2r, s.ratio});
    }
    r.tables.push_back(std::move(t));
    r.require(std::isfinite(profile.doubling_constant), "C_D not finite");
    if (cfg.space.kind == SpaceKind::interval_grid) {
      r.values["bound"] = cfg.tol("doubling_interval");
      r.require(profile.doubling_constant <= cfg.tol("doubling_interval"), "C_D above the interval bound");
    } else if (cfg.space.kind == SpaceKind::square_grid) {
      r.values["bound"] = cfg.tol("doubling_square");
      r.require(profile.doubling_constant <= cfg.tol("doubling_square"), "C_D above the square bound");
    }
  }));

  out.push_back(guarded("doubling", "mass_bounds", "lower mass bound", [&](CheckResult& r) {
    r.constant = "worst_c";
    if (profile.samples.empty()) throw std::runtime_error("no doubling profile");
    const MassBoundReport m = check_mass_bounds(profile, profile.q_fit);
    r.values["Q"] = profile.q_fit;
    r.values["worst_c"] = m.worst_c;
    r.require(m.holds, "mu(B(x,r)) >= c r^Q fails");
  }));

  out.push_back(guarded("doubling", "stability", "doubling across resolutions", [&](CheckResult& r) {
    r.constant = "factor";
    const MeasuredPointCloud* coarse = ctx.coarse();
    if (coarse == nullptr || profile.samples.empty()) return r.skip("no coarser resolution");
    const double c0 = profile_for(*coarse).doubling_constant;
    r.values["coarse"] = coarse->spec().describe();
    r.values["C_D_coarse"] = c0;
    r.values["C_D"] = profile.doubling_constant;
    r.values["factor"] = spread({c0, profile.doubling_constant});
    r.require(spread({c0, profile.doubling_constant}) <= cfg.tol("doubling_stability"), "C_D not stable across resolutions");
  }));
  return out;
}

std::vector<CheckResult> energy_suite(Context& ctx) {
  const auto& cfg = ctx.config();
  const auto& cloud = ctx.cloud();
  const double d_w = ctx.d_w();
  const ScaleGrid grid = ctx.grid(cloud);
  std::vector<CheckResult> out;
  const auto fields = ctx.fields(cloud);

  for (const auto& nf : fields) {
    EnergySweep sweep;
    bool have = false;
    out.push_back(guarded("energy", "sweep." + nf.name, "multiscale energy", [&](CheckResult& r) {
    r.constant = "fitted_limit";
      sweep = energy_sweep(nf.field, d_w, Region::all(), grid, cfg.grid.window);
      have = true;
      r.values["d_w"] = d_w;
      r.values["liminf_proxy"] = sweep.liminf_proxy;
      r.values["limsup_proxy"] = sweep.limsup_proxy;
      r.values["sup_all"] = sweep.sup_all;
      r.values["fitted_limit"] = sweep.fitted_limit;
      r.values["loglog_slope"] = sweep.loglog_slope;
      r.tables.push_back(sweep_table("sweep_" + nf.name, sweep));
      r.require(sweep.liminf_proxy <= sweep.limsup_proxy && sweep.limsup_proxy <= sweep.sup_all,
                "proxies out of order");
      const auto oracle = interval_limit(nf.name);
      if (cfg.space.kind == SpaceKind::interval_grid && d_w == 2.0 && oracle) {
        r.values["oracle"] = *oracle;
        r.values["relative_error"] = sweep.fitted_limit / *oracle - 1.0;
        r.require(std::abs(sweep.fitted_limit / *oracle - 1.0) <= cfg.tol("calibration"),
                  "fitted limit off the closed form");
      }
      if (nf.name == "spike") {
        const bool flagged = sweep.limsup_proxy > 10.0 * sweep.values.front();
        r.values["flagged_rough"] = flagged;
        r.require(flagged, "spike not flagged as rough");
      }
    }));
    if (!have) continue;
    out.push_back(guarded("energy", "comparability." + nf.name, "sup vs liminf comparability", [&](CheckResult& r) {
      if (sweep.scales.size() < 2) return r.skip("fewer than two admissible scales");
      const double q = comparability_ratio(sweep);
      const bool line = cfg.space.kind == SpaceKind::interval_grid && nf.name == "x";
      const double bound = line ? cfg.tol("comparability_line") : cfg.tol("comparability");
      r.values["ratio"] = q;
      r.values["bound"] = bound;
      if (nf.name == "spike") return r.skip("rough field, ratio recorded only");
      r.require(std::isfinite(q) && q <= bound, "comparability ratio above bound");
    }));
  }

  if (cfg.space.kind == SpaceKind::square_grid) {
    out.push_back(guarded("energy", "calibration_2d", "planar calibration", [&](CheckResult& r) {
      const double e = ks_energy(ScalarField::from_coords(cloud, [](auto p) { return p[0]; }), 0.05, 2.0);
      r.values["E"] = e;
      r.values["oracle"] = 0.25;
      r.require(std::abs(e / 0.25 - 1.0) <= cfg.tol("calibration_2d"), "E(x, 0.05) off 1/4");
    }));
  }

  out.push_back(guarded("energy", "walk_dimension", "walk dimension from energy scaling", [&](CheckResult& r) {
    const auto& info = ctx.d_w_info();
    std::vector<ScalarField> ks;
    if (cfg.space.kind == SpaceKind::gasket) {
      for (const auto& corners : kCorners) {
        ks.push_back(gasket_harmonic(cloud, corners));
      }
    } else {
      for (const auto& nf : fields) {
        if (nf.name != "step" && nf.name != "spike" && !nf.field.is_constant()) ks.push_back(nf.field);
      }
    }
    if (ks.empty()) return r.skip("no smooth fields");
    const WalkDimFit fit = fit_walk_dimension(ks, grid, std::max(3, cfg.grid.window));
    r.values["d_w_hat"] = fit.d_w_hat;
    r.values["residual"] = fit.residual;
    r.values["r_lo"] = fit.r_lo;
    r.values["r_hi"] = fit.r_hi;
    if (is_grid(cfg.space)) {
      r.require(std::abs(fit.d_w_hat - 2.0) <= cfg.tol("walkdim_grid"), "grid slope off 2");
    }
    if (info.contains("eigen_ratio") && info["eigen_ratio"].is_number()) {
      const double e = info["eigen_ratio"].get<double>();
      r.values["eigen_ratio"] = e;
      r.require(std::abs(fit.d_w_hat - e) <= cfg.tol("walkdim_agree"), "disagrees with the eigenvalue ratio");
    }
    r.require(fit.d_w_hat > 0.0, "nonpositive slope");
  }));
  return out;
}

std::vector<CheckResult> smoothing_suite(Context& ctx) {
  const auto& cfg = ctx.config();
  const auto& cloud = ctx.cloud();
  const std::vector<double> eps = eps_ladder(cloud, smoothing_start(cloud), 3);
  std::vector<CheckResult> out;
  const auto fields = ctx.fields(cloud);

  out.push_back(guarded("smoothing", "net", "bounded-overlap coverings", [&](CheckResult& r) {
    r.constant = "overlap_max";
    if (eps.size() < 2) return r.skip("fewer than two admissible eps");
    Table t{"net", {"eps", "centers", "overlap_5eps", "cover_ok"}, {}};
    std::vector<int> overlaps;
    // The two smallest dyadic eps: at the coarse end 5 eps balls saturate the space.
    for (double e : {eps[eps.size() - 2], eps.back()}) {
      const CoveringNet net = build_net(cloud, e);
      t.rows.push_back({e, static_cast<double>(net.centers.size()), static_cast<double>(net.overlap_5eps),
                        net.cover_ok ? 1.0 : 0.0});
      overlaps.push_back(net.overlap_5eps);
      r.require(net.cover_ok, "net does not cover");
    }
    const auto [lo, hi] = std::minmax_element(overlaps.begin(), overlaps.end());
    r.values["overlap_min"] = *lo;
    r.values["overlap_max"] = *hi;
    r.values["factor"] = static_cast<double>(*hi) / std::max(1, *lo);
    r.require(*hi <= cfg.tol("overlap_factor") * *lo, "overlap changes with eps");
    r.tables.push_back(std::move(t));
  }));

  out.push_back(guarded("smoothing", "partition", "partition of unity", [&](CheckResult& r) {
    if (eps.empty()) return r.skip("no admissible eps");
    std::vector<double> lips;
    double worst_sum = 0.0;
    bool support_ok = true;
    for (double e : eps) {
      const PartitionOfUnity pou(cloud, build_net(cloud, e));
      for (std::size_t x = 0; x < cloud.size(); ++x) {
        double s = 0.0;
        for (const auto& en : pou.at(static_cast<PointId>(x))) {
          s += en.value;
          support_ok = support_ok && cloud.distance(static_cast<PointId>(x), pou.net().centers[en.center]) < 2.0 * e;
        }
        worst_sum = std::max(worst_sum, std::abs(s - 1.0));
      }
      lips.push_back(pou.lip_constant());
    }
    r.values["max_sum_error"] = worst_sum;
    r.values["lip_constants"] = lips;
    r.require(worst_sum <= 1e-12, "partition does not sum to 1");
    r.require(support_ok, "bump outside B(x_i, 2 eps)");
    r.require(spread(lips) <= cfg.tol("stability"), "Lipschitz constant not stable in eps");
  }));

  out.push_back(guarded("smoothing", "mollifier", "mollifier estimates", [&](CheckResult& r) {
    if (eps.size() < 3) return r.skip("fewer than three admissible eps");
    Table t{"mollifier", {"field", "eps", "lip_ratio", "l2_ratio", "l2_error"}, {}};
    std::vector<double> lip, l2;
    for (double e : eps) {
      const PartitionOfUnity pou(cloud, build_net(cloud, e));
      double wl = 0.0, w2 = 0.0;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const MollifierReport m = mollifier_estimates(fields[i].field, e);
        const double err = (mollify(fields[i].field, pou) - fields[i].field).l2_norm();
        t.rows.push_back({static_cast<double>(i), e, m.lip_bound_ratio, m.l2_bound_ratio, err});
        wl = std::max(wl, m.lip_bound_ratio);
        w2 = std::max(w2, m.l2_bound_ratio);
      }
      lip.push_back(wl);
      l2.push_back(w2);
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].field.is_constant()) continue;
      const double e0 = t.rows[i][4], e1 = t.rows[fields.size() + i][4], e2 = t.rows[2 * fields.size() + i][4];
      r.require(e0 > e1 && e1 > e2, "||f_eps - f|| not decreasing for " + fields[i].name);
    }
    r.values["eps"] = eps;
    r.values["lip_ratio"] = lip;
    r.values["l2_ratio"] = l2;
    r.values["lip_spread"] = spread(lip);
    r.values["l2_spread"] = spread(l2);
    r.constant = "lip_spread";
    r.require(std::all_of(lip.begin(), lip.end(), finite_positive), "Lipschitz ratio not finite");
    r.require(std::all_of(l2.begin(), l2.end(), finite_positive), "L2 ratio not finite");
    // Stability is only asserted on grids; elsewhere the spreads are reported.
    if (is_grid(cfg.space)) {
      r.require(spread(lip) <= cfg.tol("stability"), "Lipschitz ratio not stable");
      r.require(spread(l2) <= cfg.tol("stability"), "L2 ratio not stable");
    }
    r.tables.push_back(std::move(t));
  }));

  out.push_back(guarded("smoothing", "cutoff", "controlled cutoff", [&](CheckResult& r) {
    if (eps.size() < 2) return r.skip("fewer than two admissible eps");
    Table t{"cutoff", {"eps", "center", "quotient"}, {}};
    std::vector<double> worst;
    for (std::size_t k = 0; k < 2; ++k) {
      const PartitionOfUnity pou(cloud, build_net(cloud, eps[k]));
      const CutoffReport c = check_controlled_cutoff(pou, ctx.d_w(), ctx.grid(cloud), cfg.grid.window);
      for (std::size_t i = 0; i < c.per_center.size(); ++i) {
        t.rows.push_back({eps[k], static_cast<double>(pou.net().centers[i]), c.per_center[i]});
      }
      worst.push_back(c.worst);
    }
    r.values["worst"] = worst;
    r.values["factor"] = spread(worst);
    r.require(std::all_of(worst.begin(), worst.end(), finite_positive) && spread(worst) <= cfg.tol("cutoff_stability"),
              "cutoff quotient not stable");
    r.tables.push_back(std::move(t));
  }));
  return out;
}

std::vector<CheckResult> poincare_suite(Context& ctx) {
  const auto& cfg = ctx.config();
  const auto& cloud = ctx.cloud();
  const double d_w = ctx.d_w();
  std::vector<CheckResult> out;
  const auto fields = ctx.fields(cloud);
  const NamedField* f = first_nonconstant(fields);
  if (f == nullptr) {
    return {guarded("poincare", "all", "poincare inequalities", [](CheckResult& r) { r.skip("all fields are constant"); })};
  }
  const auto balls_for = [&](const MeasuredPointCloud& c) {
    return sample_balls(c, cfg.poincare_centers, default_radii(c, cfg.lambda), cfg.seed);
  };
  const auto balls = balls_for(cloud);
  PoincareOptions opt;
  opt.lambda = cfg.lambda;
  opt.seed = cfg.seed;
  opt.grid = ctx.grid(cloud);
  opt.window = cfg.grid.window;

  double c_lip = 0.0;
  out.push_back(guarded("poincare", "lip", "poincare with Lipschitz slopes", [&](CheckResult& r) {
    r.constant = "C_best";
    const PoincareReport p = poincare_check(f->field, PoincareMode::lip, d_w, balls, opt);
    c_lip = p.c_best;
    r.values["field"] = f->name;
    r.values["lambda"] = p.lambda;
    r.values["C_best"] = p.c_best;
    r.tables.push_back(poincare_table("poincare_lip", p));
    r.require(finite_positive(p.c_best), "C_best not finite and positive");
  }));

  out.push_back(guarded("poincare", "ks", "poincare with multiscale energies", [&](CheckResult& r) {
    r.constant = "C_best";
    const PoincareReport p = poincare_check(f->field, PoincareMode::ks, d_w, balls, opt);
    r.values["field"] = f->name;
    r.values["d_w"] = d_w;
    r.values["lambda"] = p.lambda;
    r.values["C_best"] = p.c_best;
    r.tables.push_back(poincare_table("poincare_ks", p));
    r.require(finite_positive(p.c_best), "C_best not finite and positive");
    // The constants differ by the calibration factor of the energy, 1/(d+2) on R^d, so the
    // factor bound is only asserted on the line.
    if (c_lip > 0.0) {
      r.values["ratio_to_lip"] = p.c_best / c_lip;
      if (cfg.space.kind == SpaceKind::interval_grid && d_w == 2.0) {
        r.require(spread({c_lip, p.c_best}) <= cfg.tol("mode_factor"), "ks and lip constants differ too much");
      }
    }
  }));

  out.push_back(guarded("poincare", "energy_measure", "poincare with energy measures", [&](CheckResult& r) {
    r.constant = "C_best";
    if (ctx.form() == nullptr) return r.skip("no graph form for this space");
    PoincareOptions o = opt;
    o.form = ctx.form();
    const PoincareReport p = poincare_check(f->field, PoincareMode::energy_measure, d_w, balls, o);
    r.values["field"] = f->name;
    r.values["d_w"] = d_w;
    r.values["Lambda"] = p.lambda;
    r.values["C_best"] = p.c_best;
    r.tables.push_back(poincare_table("poincare_energy_measure", p));
    r.require(finite_positive(p.c_best), "C_best not finite and positive");
    if (ctx.coarse_form() != nullptr) {
      const auto cf = ctx.fields(*ctx.coarse());
      const NamedField* g = find_field(cf, f->name);
      PoincareOptions oc = o;
      oc.form = ctx.coarse_form();
      oc.grid = ctx.grid(*ctx.coarse());
      const double c0 = poincare_check(g->field, PoincareMode::energy_measure, d_w, balls_for(*ctx.coarse()), oc).c_best;
      r.values["C_best_coarse"] = c0;
      r.values["factor"] = spread({c0, p.c_best});
      r.require(finite_positive(c0) && spread({c0, p.c_best}) <= cfg.tol("stability"),
                "constant not stable across resolutions");
    }
  }));

  if (cfg.space.kind == SpaceKind::interval_grid && find_field(fields, "x")) {
    out.push_back(guarded("poincare", "identity", "poincare constant of the identity", [&](CheckResult& r) {
      const ScalarField& x = find_field(fields, "x")->field;
      std::vector<BallSample> inner;
      std::mt19937_64 rng(cfg.seed);
      std::uniform_int_distribution<PointId> pick(0, static_cast<PointId>(cloud.size() - 1));
      const auto radii = ctx.grid(cloud).admissible(cloud);
      for (std::size_t tries = 0; inner.size() < cfg.poincare_centers * radii.size() && tries < 100000; ++tries) {
        const PointId p = pick(rng);
        for (double rad : radii) {
          if (cloud.coord(p, 0) - rad > 0.0 && cloud.coord(p, 0) + rad < 1.0) inner.push_back({p, rad});
        }
      }
      PoincareOptions o1 = opt;
      o1.lambda = 1.0;
      const PoincareReport p = poincare_check(x, PoincareMode::lip, 2.0, inner, o1);
      double lo = std::numeric_limits<double>::infinity();
      for (const auto& s : p.samples) {
        if (s.counted) lo = std::min(lo, s.ratio);
      }
      r.values["ratio_min"] = lo;
      r.values["ratio_max"] = p.c_best;
      r.values["oracle"] = 1.0 / 3.0;
      const double tol = cfg.tol("poincare_lip");
      r.require(std::abs(3.0 * lo - 1.0) <= tol && std::abs(3.0 * p.c_best - 1.0) <= tol, "ratio off 1/3");
    }));
  }

  out.push_back(guarded("poincare", "maximal", "weak-L2 maximal function", [&](CheckResult& r) {
    r.constant = "max_quotient";
    const double radius = cloud.diameter() / 4.0;
    const auto quotient = [&](const ScalarField& g, const MeasuredPointCloud& c, WeakL2Report* keep) {
      const MaximalField m = maximal_function(g, radius, d_w, ctx.grid(c), cfg.grid.window);
      const double s = std::sqrt(m.energy_proxy / c.total_mass());
      std::vector<double> thresholds;
      for (int k = -6; k <= 6; ++k) thresholds.push_back(s * std::pow(2.0, 0.5 * k));
      WeakL2Report w = weak_l2_check(m, thresholds);
      if (keep) *keep = w;
      return w.max_quotient;
    };
    WeakL2Report w;
    const double q = quotient(f->field, cloud, &w);
    Table t{"maximal", {"threshold", "level_mass", "quotient"}, {}};
    for (std::size_t k = 0; k < w.thresholds.size(); ++k) t.rows.push_back({w.thresholds[k], w.level_mass[k], w.quotients[k]});
    r.tables.push_back(std::move(t));
    r.values["field"] = f->name;
    r.values["R"] = radius;
    r.values["max_quotient"] = q;
    r.require(finite_positive(q), "quotient not finite and positive");
    if (ctx.coarse() != nullptr) {
      const auto cf = ctx.fields(*ctx.coarse());
      const double q0 = quotient(find_field(cf, f->name)->field, *ctx.coarse(), nullptr);
      r.values["max_quotient_coarse"] = q0;
      r.require(finite_positive(q0) && spread({q0, q}) <= cfg.tol("maximal_stability"),
                "quotient not stable across resolutions");
    }
  }));

  out.push_back(guarded("poincare", "telescoping", "telescoping chain bound", [&](CheckResult& r) {
    const double rho = 0.2 * cloud.diameter();
    if (rho < 4.0 * cloud.admissible_floor()) return r.skip("rho below 4 kappa h");
    std::mt19937_64 rng(cfg.seed + 1);
    std::uniform_int_distribution<PointId> pick(0, static_cast<PointId>(cloud.size() - 1));
    Table t{"telescoping", {"x", "rho", "lhs", "rhs", "c_report"}, {}};
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const PointId x = pick(rng);
      for (double rr : {rho, rho / 2.0}) {
        if (rr < 4.0 * cloud.admissible_floor()) continue;
        const TelescopingReport tb = telescoping_bound(f->field, x, rr, d_w, ctx.grid(cloud), cfg.lambda,
                                                       cfg.tol("telescoping"), cfg.grid.window);
        t.rows.push_back({static_cast<double>(x), rr, tb.lhs, tb.rhs, tb.c_report});
        worst = std::max(worst, tb.c_report);
      }
    }
    r.values["field"] = f->name;
    r.values["worst_c"] = worst;
    r.values["allowed"] = cfg.tol("telescoping");
    r.require(worst <= cfg.tol("telescoping"), "chain bound exceeds the allowed constant");
    r.tables.push_back(std::move(t));
  }));
  return out;
}

std::vector<CheckResult> graphform_suite(Context& ctx) {
  const auto& cfg = ctx.config();
  const auto& cloud = ctx.cloud();
  std::vector<CheckResult> out;
  if (ctx.form() == nullptr) {
    return {guarded("graphform", "all", "graph Dirichlet forms",
                    [&](CheckResult& r) { r.skip("no built-in graph form for " + cfg.space.describe()); })};
  }
  const GraphDirichletForm& form = *ctx.form();
  const auto fields = ctx.fields(cloud);

  out.push_back(guarded("graphform", "form_energy", "form energies and energy measures", [&](CheckResult& r) {
    for (const auto& nf : fields) {
      const double e = form_energy(form, nf.field);
      const EnergyMeasure m = energy_measure(form, nf.field);
      r.values["E_" + nf.name] = e;
      r.require(std::abs(m.total - e) <= 1e-10 * std::max(1.0, e), "energy measure does not sum to E for " + nf.name);
      if (cfg.space.kind == SpaceKind::interval_grid) {
        const double target = nf.name == "x" ? 1.0 : nf.name == "sin" ? kPi * kPi / 2.0 : 0.0;
        if (target > 0.0) r.require(std::abs(e / target - 1.0) <= cfg.tol("form_energy"), "E off the closed form for " + nf.name);
      }
      if (cfg.space.kind == SpaceKind::gasket && nf.name.rfind("harmonic", 0) == 0 && ctx.coarse_form()) {
        const auto cf = ctx.fields(*ctx.coarse());
        const double e0 = form_energy(*ctx.coarse_form(), find_field(cf, nf.name)->field);
        r.values["E_" + nf.name + "_coarse"] = e0;
        r.require(std::abs(e - e0) <= 1e-8 * std::max(1.0, e), "harmonic energy changes with the level");
      }
    }
  }));

  out.push_back(guarded("graphform", "spectrum", "spectrum", [&](CheckResult& r) {
    r.constant = "lambda_1";
    const Spectrum& s = *ctx.spectrum();
    r.values["count"] = s.count();
    r.values["partial"] = s.partial;
    r.values["lambda_1"] = s.eigenvalues.size() > 1 ? s.eigenvalues[1] : 0.0;
    r.values["max_residual"] = s.max_residual;
    Table t{"spectrum", {"k", "lambda"}, {}};
    for (std::size_t k = 0; k < s.count(); ++k) t.rows.push_back({static_cast<double>(k), s.eigenvalues[k]});
    r.tables.push_back(std::move(t));
    r.values["relative_residual"] = s.max_residual / std::max(1.0, s.eigenvalues.back());
    r.require(s.max_residual <= 1e-8 * std::max(1.0, s.eigenvalues.back()), "eigenpair residual above 1e-8 lambda_max");
    r.require(std::abs(s.eigenvalues[0]) <= 1e-8 * std::max(1.0, s.eigenvalues.back()), "lambda_0 is not zero");
  }));

  out.push_back(guarded("graphform", "eigen_walk_dimension", "walk dimension from eigenvalue ratios", [&](CheckResult& r) {
    if (ctx.coarse_form() == nullptr) return r.skip("no coarser level");
    const WalkDimFit fit = eigen_walk_dimension(*ctx.coarse_form(), form);
    r.values["d_w_hat"] = fit.d_w_hat;
    r.values["residual"] = fit.residual;
    r.values["per_eigenvalue"] = fit.per_field;
    const double target = cfg.space.kind == SpaceKind::gasket ? kGasketDw : 2.0;
    r.values["target"] = target;
    r.require(std::abs(fit.d_w_hat - target) <= cfg.tol("eigen_walkdim"), "estimate off the known value");
  }));

  out.push_back(guarded("graphform", "heat_kernel", "heat kernel and sub-Gaussian fit", [&](CheckResult& r) {
    r.constant = "residual";
    const Spectrum& s = *ctx.spectrum();
    if (s.partial) return r.skip("needs a full spectrum (n <= 5000)");
    HeatFitOptions opt;
    opt.seed = cfg.seed;
    if (cfg.space.kind == SpaceKind::gasket) opt.straight_pairs = &form;
    const HeatKernelFit fit = fit_subgaussian(s, opt);
    r.values["c1"] = fit.c1;
    r.values["c2"] = fit.c2;
    r.values["beta"] = fit.beta;
    r.values["d_w_fit"] = fit.d_w_fit;
    r.values["d_s_fit"] = fit.d_s_fit;
    r.values["residual"] = fit.residual;
    r.values["window"] = {fit.t_lo, fit.t_hi};
    r.values["samples"] = fit.samples;
    r.values["straight_pairs"] = fit.straight_pairs;
    // Stochastic completeness at the middle of the window.
    const double t = std::sqrt(fit.t_lo * fit.t_hi);
    double mass = 0.0;
    for (std::size_t y = 0; y < cloud.size(); ++y) mass += cloud.weight(static_cast<PointId>(y)) * heat_kernel(s, t, 0, static_cast<PointId>(y));
    r.values["row_mass"] = mass;
    r.require(std::abs(mass - 1.0) <= 1e-8, "heat kernel rows do not integrate to 1");
    switch (cfg.space.kind) {
      case SpaceKind::gasket:
        r.require(fit.residual <= cfg.tol("heat_residual"), "fit residual too large");
        r.require(std::abs(fit.beta - fit.d_w_fit / (fit.d_w_fit - 1.0)) <= cfg.tol("heat_exponent"),
                  "decay exponent inconsistent with d_w_fit");
        r.require(std::abs(fit.d_s_fit / 2.0 - kGasketDsHalf) <= cfg.tol("spectral_dim"), "spectral dimension off");
        break;
      case SpaceKind::interval_grid:
        r.require(fit.d_w_fit >= 1.85 && fit.d_w_fit <= 2.15, "d_w_fit outside [1.85, 2.15]");
        r.require(fit.d_s_fit >= 0.9 && fit.d_s_fit <= 1.1, "d_s_fit outside [0.9, 1.1]");
        break;
      default: break;
    }
  }));

  out.push_back(guarded("graphform", "intrinsic_metric", "intrinsic metric", [&](CheckResult& r) {
    r.constant = "ratio_to_distance";
    if (cloud.size() > 20000) return r.skip("too many vertices for the barrier solver");
    const PointId far = cfg.space.kind == SpaceKind::gasket ? 1 : static_cast<PointId>(cloud.size() - 1);
    const IntrinsicMetricResult d = intrinsic_metric(form, 0, far);
    const double ratio = d.lower / cloud.distance(0, far);
    r.values["lower"] = d.lower;
    r.values["gap_bound"] = d.gap_bound;
    r.values["path_bound"] = d.path_bound;
    r.values["ratio_to_distance"] = ratio;
    r.require(d.lower > 0.0 && d.lower <= d.path_bound * (1.0 + 1e-9), "bounds out of order");
    if (is_grid(cfg.space) && ctx.coarse_form() != nullptr && ctx.coarse()->size() <= 20000) {
      const PointId cf = static_cast<PointId>(ctx.coarse()->size() - 1);
      const double r0 = intrinsic_metric(*ctx.coarse_form(), 0, cf).lower / ctx.coarse()->distance(0, cf);
      r.values["ratio_coarse"] = r0;
      r.require(finite_positive(r0) && spread({r0, ratio}) <= cfg.tol("stability"), "bi-Lipschitz ratio not stable");
    }
  }));

  out.push_back(guarded("graphform", "gamma_vs_lip", "energy measure vs Lipschitz slope", [&](CheckResult& r) {
    if (!is_grid(cfg.space)) return r.skip("only defined for grid forms");
    const NamedField* f = first_nonconstant(fields);
    if (f == nullptr) return r.skip("all fields are constant");
    const GammaLipReport g = gamma_vs_lip_check(form, f->field, cloud.admissible_floor());
    r.values["field"] = f->name;
    r.values["C_best"] = g.c_best;
    r.values["vertices_used"] = g.vertices_used;
    if (cfg.space.kind == SpaceKind::interval_grid && f->name == "x") {
      r.require(std::abs(g.c_best - 1.0) <= cfg.tol("gamma_lip"), "C_best off 1");
    }
    r.require(finite_positive(g.c_best), "C_best not finite and positive");
    if (ctx.coarse_form() != nullptr) {
      const auto cf = ctx.fields(*ctx.coarse());
      const double c0 =
          gamma_vs_lip_check(*ctx.coarse_form(), find_field(cf, f->name)->field, ctx.coarse()->admissible_floor()).c_best;
      r.values["C_best_coarse"] = c0;
      r.require(finite_positive(c0) && spread({c0, g.c_best}) <= cfg.tol("stability"), "not stable across resolutions");
    }
  }));
  return out;
}

std::vector<CheckResult> convergence_suite(Context& ctx) {
  const auto& cfg = ctx.config();
  const auto& cloud = ctx.cloud();
  const double d_w = ctx.d_w();
  std::vector<CheckResult> out;
  const auto fields = ctx.fields(cloud);
  const NamedField* f = first_nonconstant(fields);

  MoscoReport mosco;
  bool have_recovery = false;
  std::vector<ScalePair> pairs;
  out.push_back(guarded("convergence", "recovery", "recovery sequences", [&](CheckResult& r) {
    r.constant = "margin";
    if (f == nullptr) return r.skip("all fields are constant");
    double oracle = 0.0;
    std::string source;
    if (ctx.form() != nullptr) {
      oracle = form_energy(*ctx.form(), f->field);
      source = "graph form";
    } else {
      oracle = energy_sweep(f->field, d_w, Region::all(), ctx.grid(cloud), cfg.grid.window).fitted_limit;
      source = "fitted_limit";
    }
    for (double e : eps_ladder(cloud, std::max(0.05 * cloud.diameter(), 8.0 * cloud.mesh()), 3)) {
      pairs.push_back({e, std::max(e, cloud.admissible_floor())});
    }
    if (pairs.size() < 3) return r.skip("fewer than three admissible scale pairs");
    mosco = recovery_check(f->field, d_w, pairs, oracle, source);
    have_recovery = true;
    Table t{"recovery", {"eps", "r", "energy", "l2_error", "margin"}, {}};
    for (const auto& s : mosco.recovery) t.rows.push_back({s.eps, s.r, s.energy, s.l2_error, s.margin});
    r.tables.push_back(std::move(t));
    r.values["field"] = f->name;
    r.values["oracle"] = oracle;
    r.values["oracle_source"] = source;
    r.values["margin"] = mosco.recovery_margin;
    r.values["spread"] = mosco.recovery_spread;
    r.values["strong_trend"] = mosco.strong_trend;
    r.require(finite_positive(mosco.recovery_margin) && mosco.recovery_spread <= cfg.tol("stability"),
              "recovery margins not stable");
    r.require(mosco.strong_trend, "mollified fields do not converge");
  }));

  out.push_back(guarded("convergence", "liminf", "weak liminf probes", [&](CheckResult& r) {
    r.constant = "margin";
    if (!have_recovery) return r.skip("needs the recovery check");
    const Spectrum* s = ctx.spectrum();
    if (s == nullptr) return r.skip("needs a graph form");
    std::vector<double> scales;
    for (const auto& p : pairs) scales.push_back(p.r);
    ProbeOptions opt;
    opt.seed = cfg.seed;
    weak_liminf_probe(mosco, f->field, d_w, *s, scales, opt);
    Table t{"liminf", {"r", "k", "amplitude", "energy", "margin", "max_test_inner"}, {}};
    for (const auto& st : mosco.liminf) {
      t.rows.push_back({st.r, static_cast<double>(st.k), st.amplitude, st.energy, st.margin, st.max_test_inner});
    }
    r.tables.push_back(std::move(t));
    r.values["margin"] = mosco.liminf_margin;
    r.values["spread"] = mosco.liminf_spread;
    r.values["weak_null"] = mosco.weak_null;
    r.require(finite_positive(mosco.liminf_margin) && mosco.liminf_spread <= cfg.tol("stability"),
              "liminf margins not stable");
    r.require(mosco.weak_null, "perturbations are not weakly null");
  }));

  out.push_back(guarded("convergence", "compactness", "total boundedness of energy balls", [&](CheckResult& r) {
    r.constant = "net_size";
    const Spectrum* s = ctx.spectrum();
    if (s == nullptr || s->count() < 21) return r.skip("needs 21 eigenpairs");
    // Band-limited fields with unit form energy, sum_k lambda_k a_k^2 = 1.
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal;
    std::vector<ScalarField> family;
    for (int i = 0; i < 50; ++i) {
      std::vector<double> a(21, 0.0);
      double energy = 0.0;
      for (std::size_t k = 1; k <= 20; ++k) {
        a[k] = normal(rng);
        energy += s->eigenvalues[k] * a[k] * a[k];
      }
      ScalarField g = ScalarField::constant(cloud, 0.0);
      for (std::size_t k = 1; k <= 20; ++k) g = g + s->eigenfield(k) * (a[k] / std::sqrt(energy));
      family.push_back(std::move(g));
    }
    const ScaleGrid grid = ctx.grid(cloud);
    double cap = 0.0;
    for (const auto& g : family) {
      cap = std::max(cap, g.l2_norm_squared() + LocalEnergyWindow(g, d_w, grid, cfg.grid.window).liminf(Region::all()));
    }
    const double delta = cfg.tol("compactness_delta");
    const CompactnessProbe p = compactness_probe(family, d_w, cap, delta, grid, cfg.grid.window);
    Table t{"compactness", {"index", "budget", "in_net"}, {}};
    for (std::size_t i = 0; i < family.size(); ++i) {
      const bool in = std::find(p.net.begin(), p.net.end(), i) != p.net.end();
      t.rows.push_back({static_cast<double>(i), p.budgets[i], in ? 1.0 : 0.0});
    }
    r.tables.push_back(std::move(t));
    r.values["family_size"] = p.family_size;
    r.values["cap"] = cap;
    r.values["delta"] = delta;
    r.values["net_size"] = p.net_size;
    r.require(static_cast<double>(p.net_size) <= cfg.tol("net_fraction") * static_cast<double>(p.family_size),
              "net too large");
  }));

  out.push_back(guarded("convergence", "sobolev", "Sobolev-type embedding", [&](CheckResult& r) {
    r.constant = "max_quotient";
    std::vector<ScalarField> fs;
    std::vector<std::string> names;
    for (const auto& nf : fields) {
      if (!nf.field.is_constant()) {
        fs.push_back(nf.field);
        names.push_back(nf.name);
      }
    }
    if (fs.empty()) return r.skip("all fields are constant");
    const auto q_of = [&](const MeasuredPointCloud& c) {
      return estimate_doubling(c, cfg.doubling_centers, ctx.grid(c).admissible(c), cfg.seed).q_fit;
    };
    const double q = q_of(cloud);
    const SobolevReport rep = sobolev_check(fs, d_w, q, ctx.grid(cloud), cfg.grid.window);
    r.values["Q"] = q;
    r.values["sup_branch"] = rep.sup_branch;
    if (rep.sup_branch) {
      r.values["theta"] = rep.theta;
    } else {
      r.values["q"] = rep.q;
    }
    r.values["max_quotient"] = rep.max_quotient;
    Table t{"sobolev", {"field", "quotient"}, {}};
    for (std::size_t i = 0; i < rep.quotients.size(); ++i) t.rows.push_back({static_cast<double>(i), rep.quotients[i]});
    r.tables.push_back(std::move(t));
    r.require(finite_positive(rep.max_quotient), "quotient not finite and positive");
    if (ctx.coarse() != nullptr) {
      const auto cf = ctx.fields(*ctx.coarse());
      std::vector<ScalarField> gs;
      for (const auto& n : names) gs.push_back(find_field(cf, n)->field);
      const double q0 = sobolev_check(gs, d_w, q_of(*ctx.coarse()), ctx.grid(*ctx.coarse()), cfg.grid.window).max_quotient;
      r.values["max_quotient_coarse"] = q0;
      r.require(finite_positive(q0) && spread({q0, rep.max_quotient}) <= cfg.tol("stability"),
                "quotient not stable across resolutions");
    }
  }));
  return out;
}

}  // namespace

std::vector<CheckResult> run_suite(const std::string& suite, Context& ctx) {
  if (suite == "doubling") return doubling_suite(ctx);
  if (suite == "energy") return energy_suite(ctx);
  if (suite == "smoothing") return smoothing_suite(ctx);
  if (suite == "poincare") return poincare_suite(ctx);
  if (suite == "graphform") return graphform_suite(ctx);
  if (suite == "convergence") return convergence_suite(ctx);
  throw ConfigError("unknown suite " + suite);
}

}  // namespace kslab::app
