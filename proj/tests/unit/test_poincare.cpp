#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "kslab/poincare.hpp"

using namespace kslab;

namespace {

ScalarField line(const MeasuredPointCloud& c) {
  return ScalarField::from_coords(c, [](auto p) { return p[0]; });
}

// Balls strictly inside (0, 1) at the admissible scales of the standard grid.
std::vector<BallSample> interior_balls(const MeasuredPointCloud& c, std::size_t per_radius, std::uint64_t seed) {
  const auto radii = ScaleGrid::standard(c).admissible(c);
  std::vector<BallSample> balls;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<PointId> pick(0, static_cast<PointId>(c.size() - 1));
  while (balls.size() < per_radius * radii.size()) {
    const PointId p = pick(rng);
    for (double r : radii) {
      if (c.coord(p, 0) - r > 0.0 && c.coord(p, 0) + r < 1.0) balls.push_back({p, r});
    }
  }
  return balls;
}

// Average over the open ball by a plain scan.
double scan_average(const ScalarField& f, PointId x, double r) {
  const auto& c = f.cloud();
  double s = 0.0, m = 0.0;
  for (PointId y = 0; y < c.size(); ++y) {
    if (c.distance(x, y) < r) {
      s += c.weight(y) * f[y];
      m += c.weight(y);
    }
  }
  return s / m;
}

}  // namespace

TEST_CASE("radii and ball samples") {
  const auto c = build_cloud(SpaceSpec::interval(1001));
  const auto radii = default_radii(c, 2.0);
  REQUIRE_FALSE(radii.empty());
  CHECK(radii.front() == doctest::Approx(0.25));
  CHECK(radii.back() >= c.admissible_floor());
  CHECK(std::is_sorted(radii.rbegin(), radii.rend()));
  const auto a = sample_balls(c, 10, radii, 3);
  const auto b = sample_balls(c, 10, radii, 3);
  CHECK(a.size() == 10 * radii.size());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].center == b[i].center);
}

TEST_CASE("constants have zero Poincare ratios") {
  const auto c = build_cloud(SpaceSpec::interval(401));
  const auto balls = sample_balls(c, 20, default_radii(c, 2.0), 1);
  const auto k = ScalarField::constant(c, 4.0);
  for (PoincareMode mode : {PoincareMode::lip, PoincareMode::ks}) {
    const auto rep = poincare_check(k, mode, 2.0, balls);
    CHECK(rep.c_best == 0.0);
    for (const auto& s : rep.samples) CHECK(s.lhs == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("the line has lip ratio 1/3 on interior balls") {
  const auto c = build_cloud(SpaceSpec::interval(2001));
  const auto balls = interior_balls(c, 30, 5);
  PoincareOptions opt;
  opt.lambda = 1.0;
  const auto rep = poincare_check(line(c), PoincareMode::lip, 2.0, balls, opt);
  CHECK(rep.mode == PoincareMode::lip);
  for (const auto& s : rep.samples) {
    if (s.counted) CHECK(s.ratio == doctest::Approx(1.0 / 3.0).epsilon(0.1));
  }
  CHECK(rep.c_best == doctest::Approx(1.0 / 3.0).epsilon(0.1));
}

TEST_CASE("ks and lip constants agree within a factor 4 in 1D") {
  const auto c = build_cloud(SpaceSpec::interval(2001));
  const auto balls = sample_balls(c, 30, default_radii(c, 2.0), 2);
  for (const auto& f : {line(c), ScalarField::from_coords(c, [](auto p) { return p[0] * p[0]; })}) {
    const double lip = poincare_check(f, PoincareMode::lip, 2.0, balls).c_best;
    const double ks = poincare_check(f, PoincareMode::ks, 2.0, balls).c_best;
    REQUIRE(lip > 0.0);
    REQUIRE(ks > 0.0);
    CHECK(std::max(lip, ks) / std::min(lip, ks) <= 4.0);
  }
}

TEST_CASE("energy_measure mode needs a form") {
  const auto c = build_cloud(SpaceSpec::interval(101));
  const auto balls = sample_balls(c, 5, default_radii(c, 2.0), 1);
  CHECK_THROWS(poincare_check(line(c), PoincareMode::energy_measure, 2.0, balls));
  const auto form = build_form(c, FormKind::grid1d);
  PoincareOptions opt;
  opt.form = &form;
  CHECK(poincare_check(line(c), PoincareMode::energy_measure, 2.0, balls, opt).c_best > 0.0);
}

TEST_CASE("maximal function") {
  const auto c = build_cloud(SpaceSpec::interval(401));
  const auto grid = ScaleGrid::standard(c);
  const auto f = ScalarField::from_coords(c, [](auto p) { return std::sin(6.0 * p[0]); });
  SUBCASE("monotone in R") {
    const auto small = maximal_function(f, 0.06, 2.0, grid);
    const auto large = maximal_function(f, 0.25, 2.0, grid);
    CHECK(small.rhos.size() < large.rhos.size());
    for (PointId x = 0; x < c.size(); ++x) CHECK(small.values[x] <= large.values[x] + 1e-15);
  }
  SUBCASE("homogeneous of degree one") {
    const auto a = maximal_function(f, 0.25, 2.0, grid);
    const auto b = maximal_function(f * -3.0, 0.25, 2.0, grid);
    for (PointId x = 0; x < c.size(); ++x) CHECK(b.values[x] == doctest::Approx(3.0 * a.values[x]));
  }
  SUBCASE("zero for constants") {
    const auto m = maximal_function(ScalarField::constant(c, 1.0), 0.25, 2.0, grid);
    CHECK(*std::max_element(m.values.begin(), m.values.end()) == 0.0);
  }
}

TEST_CASE("weak-L2 quotients are stable across resolutions") {
  const std::vector<double> thresholds{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.55, 0.6, 0.8, 1.0, 2.0};
  std::vector<double> q;
  for (int n : {401, 801}) {
    const auto c = build_cloud(SpaceSpec::interval(n));
    const auto m = maximal_function(line(c), 0.25, 2.0, ScaleGrid::standard(c));
    const auto rep = weak_l2_check(m, thresholds);
    CHECK(rep.thresholds.size() == thresholds.size());
    CHECK(std::is_sorted(rep.level_mass.rbegin(), rep.level_mass.rend()));
    q.push_back(rep.max_quotient);
  }
  REQUIRE(q[0] > 0.0);
  REQUIRE(q[1] > 0.0);
  CHECK(std::max(q[0], q[1]) / std::min(q[0], q[1]) <= 2.0);
}

TEST_CASE("telescoping chain matches a brute-force chain") {
  const auto c = build_cloud(SpaceSpec::interval(801));
  const auto f = ScalarField::from_coords(c, [](auto p) { return p[0] * p[0]; });
  const PointId x = 200;  // x = 0.25
  REQUIRE(c.coord(x, 0) == doctest::Approx(0.25));
  const auto rep = telescoping_bound(f, x, 0.2, 2.0, ScaleGrid::standard(c));
  double chain = 0.0;
  double prev = scan_average(f, x, 0.2);
  std::size_t k = 1;
  for (double r = 0.1; r >= c.admissible_floor(); r *= 0.5, ++k) {
    const double a = scan_average(f, x, r);
    REQUIRE(k < rep.averages.size());
    CHECK(rep.averages[k] == doctest::Approx(a).epsilon(1e-12));
    chain += std::abs(prev - a);
    prev = a;
  }
  CHECK(k == rep.radii.size());
  CHECK(rep.chain_sum == doctest::Approx(chain).epsilon(1e-12));
  CHECK(rep.lhs <= rep.chain_sum + 1e-15);
  CHECK(rep.ok);
  CHECK(rep.c_report <= 4.0);
  CHECK_THROWS_AS(telescoping_bound(f, x, 0.005, 2.0, ScaleGrid::standard(c)), InadmissibleScale);
}
