#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kslab/energy.hpp"

using namespace kslab;

namespace {

ScalarField line(const MeasuredPointCloud& c) {
  return ScalarField::from_coords(c, [](auto p) { return p[0]; });
}

ScalarField random_field(const MeasuredPointCloud& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(c.size());
  for (auto& x : v) x = g(rng);
  return ScalarField(c, std::move(v));
}

}  // namespace

TEST_CASE("constants have zero energy at every admissible scale") {
  const auto c = build_cloud(SpaceSpec::gasket(5));
  const auto f = ScalarField::constant(c, 3.5);
  for (double r : {0.5, 0.25, 0.125}) CHECK(ks_energy(f, r, 2.3) == 0.0);
}

TEST_CASE("E(x, r) on the interval follows 1/3 - r/9") {
  const auto c = build_cloud(SpaceSpec::interval(2001));
  for (double r : {0.05, 0.02, 0.01}) {
    const double e = ks_energy(line(c), r, 2.0);
    CHECK(e == doctest::Approx(1.0 / 3.0 - r / 9.0).epsilon(0.01));
  }
}

TEST_CASE("indexed energy equals the brute-force double sum") {
  SUBCASE("five points") {
    const auto c = build_cloud(SpaceSpec::interval(5));
    const ScalarField f(c, {0.0, 1.0, -2.0, 0.5, 4.0});
    for (double r : {0.76, 0.8, 1.1}) {
      CHECK(ks_energy(f, r, 2.0) == doctest::Approx(reference::ks_energy_brute(f, r, 2.0)).epsilon(1e-12));
    }
  }
  SUBCASE("gasket with a region") {
    const auto c = build_cloud(SpaceSpec::gasket(4));
    const auto f = random_field(c, 2);
    const auto u = Region::ball(c, 7, 0.4);
    const double a = ks_energy(f, 0.2, 2.32, u);
    CHECK(a == doctest::Approx(reference::ks_energy_brute(f, 0.2, 2.32, u)).epsilon(1e-12));
  }
}

TEST_CASE("energy density sums to the energy") {
  const auto c = build_cloud(SpaceSpec::square(41));
  const auto f = random_field(c, 4);
  const auto d = energy_density(f, 0.1, 2.0);
  double s = 0.0;
  for (double v : d) s += v;
  CHECK(s == doctest::Approx(ks_energy(f, 0.1, 2.0)).epsilon(1e-12));
}

TEST_CASE("energy is quadratic and shift invariant") {
  const auto c = build_cloud(SpaceSpec::interval(301));
  const auto f = random_field(c, 8);
  const double e = ks_energy(f, 0.05, 2.0);
  CHECK(ks_energy(f * 3.0, 0.05, 2.0) == doctest::Approx(9.0 * e));
  CHECK(ks_energy(f.shifted(-7.0), 0.05, 2.0) == doctest::Approx(e));
}

TEST_CASE("region energies are additive over a partition") {
  const auto c = build_cloud(SpaceSpec::interval(201));
  const auto f = random_field(c, 1);
  std::vector<PointId> left, right;
  for (PointId i = 0; i < c.size(); ++i) (i < 80 ? left : right).push_back(i);
  const double whole = ks_energy(f, 0.05, 2.0);
  const double parts = ks_energy(f, 0.05, 2.0, Region::of(left)) + ks_energy(f, 0.05, 2.0, Region::of(right));
  CHECK(parts == doctest::Approx(whole).epsilon(1e-12));
}

TEST_CASE("inputs outside the domain are rejected") {
  const auto c = build_cloud(SpaceSpec::interval(101));
  CHECK_THROWS_AS(ks_energy(line(c), 0.01, 2.0), InadmissibleScale);
  CHECK_THROWS_AS(ks_energy(line(c), 0.1, 1.5), std::invalid_argument);
}

TEST_CASE("interval sweeps reach the closed-form limits") {
  const auto c = build_cloud(SpaceSpec::interval(2001));
  const auto grid = ScaleGrid::standard(c);
  const auto x = energy_sweep(line(c), 2.0, Region::all(), grid);
  CHECK(x.fitted_limit == doctest::Approx(1.0 / 3.0).epsilon(0.02));
  const auto s = energy_sweep(ScalarField::from_coords(c, [](auto p) { return std::sin(std::numbers::pi * p[0]); }),
                              2.0, Region::all(), grid);
  CHECK(s.fitted_limit == doctest::Approx(std::numbers::pi * std::numbers::pi / 6.0).epsilon(0.02));
  for (const auto& w : {x, s}) {
    CHECK(w.liminf_proxy <= w.limsup_proxy);
    CHECK(w.limsup_proxy <= w.sup_all);
  }
}

TEST_CASE("a single spike is flagged as rough") {
  const auto c = build_cloud(SpaceSpec::interval(101));
  std::vector<double> v(c.size(), 0.0);
  v[50] = 1.0;
  const auto w = energy_sweep(ScalarField(c, v), 2.0, Region::all(), ScaleGrid::standard(c));
  CHECK(w.limsup_proxy > 10.0 * w.values.front());
}

TEST_CASE("comparability of the line is tight") {
  const auto c = build_cloud(SpaceSpec::interval(2001));
  const auto w = energy_sweep(line(c), 2.0, Region::all(), ScaleGrid::standard(c));
  CHECK(comparability_ratio(w) >= 1.0);
  CHECK(comparability_ratio(w) <= 1.05);
  const auto k = energy_sweep(ScalarField::constant(c, 1.0), 2.0, Region::all(), ScaleGrid::standard(c));
  CHECK(comparability_ratio(k) == 1.0);
}

TEST_CASE("sweeps with no admissible scale throw") {
  const auto c = build_cloud(SpaceSpec::interval(11));
  ScaleGrid g;
  g.r_max = 0.05;
  CHECK_THROWS_AS(energy_sweep(line(c), 2.0, Region::all(), g), InadmissibleScale);
}

TEST_CASE("walk dimension of grids is close to 2") {
  SUBCASE("interval") {
    const auto c = build_cloud(SpaceSpec::interval(2001));
    const std::vector<ScalarField> fs{
        line(c), ScalarField::from_coords(c, [](auto p) { return std::sin(std::numbers::pi * p[0]); })};
    const auto fit = fit_walk_dimension(fs, ScaleGrid::standard(c));
    CHECK(fit.method == WalkDimMethod::ks_scaling);
    CHECK(fit.d_w_hat >= 1.9);
    CHECK(fit.d_w_hat <= 2.1);
  }
  SUBCASE("square") {
    const auto c = build_cloud(SpaceSpec::square(101));
    const std::vector<ScalarField> fs{line(c)};
    const auto fit = fit_walk_dimension(fs, ScaleGrid::standard(c));
    CHECK(fit.d_w_hat >= 1.9);
    CHECK(fit.d_w_hat <= 2.1);
  }
}

TEST_CASE("local window matches direct sweeps") {
  const auto c = build_cloud(SpaceSpec::interval(401));
  const auto f = random_field(c, 3);
  const auto grid = ScaleGrid::standard(c);
  const LocalEnergyWindow w(f, 2.0, grid);
  const auto s = energy_sweep(f, 2.0, Region::all(), grid);
  CHECK(w.liminf(Region::all()) == doctest::Approx(s.liminf_proxy).epsilon(1e-12));
  CHECK(w.limsup(Region::all()) == doctest::Approx(s.limsup_proxy).epsilon(1e-12));
  std::vector<PointId> ids{3, 50, 51, 200};
  CHECK(w.liminf(ids) == doctest::Approx(w.liminf(Region::of(ids))));
}
