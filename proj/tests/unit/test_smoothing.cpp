#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kslab/smoothing.hpp"

using namespace kslab;

namespace {

ScalarField line(const MeasuredPointCloud& c) {
  return ScalarField::from_coords(c, [](auto p) { return p[0]; });
}

ScalarField random_field(const MeasuredPointCloud& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(c.size());
  for (auto& x : v) x = u(rng);
  return ScalarField(c, std::move(v));
}

}  // namespace

TEST_CASE("a net wider than the space has one center") {
  const auto c = build_cloud(SpaceSpec::gasket(3));
  const auto net = build_net(c, 1.5 * c.diameter());
  CHECK(net.centers.size() == 1);
  CHECK(net.cover_ok);
  CHECK(net.overlap_5eps == 1);
}

TEST_CASE("interval net at eps = 0.1") {
  const auto c = build_cloud(SpaceSpec::interval(101));
  const auto net = build_net(c, 0.1);
  CHECK(net.centers.size() >= 10);
  CHECK(net.centers.size() <= 11);
  CHECK(net.cover_ok);
  CHECK(net.overlap_5eps <= 11);
  for (std::size_t i = 0; i < net.centers.size(); ++i) {
    for (std::size_t j = i + 1; j < net.centers.size(); ++j) {
      CHECK(c.distance(net.centers[i], net.centers[j]) >= 0.1 - 1e-12);
    }
  }
}

TEST_CASE("gasket overlap settles across eps") {
  const auto c = build_cloud(SpaceSpec::gasket(6));
  const auto a = build_net(c, 1.0 / 16.0);
  const auto b = build_net(c, 1.0 / 32.0);
  CHECK(a.cover_ok);
  CHECK(b.cover_ok);
  CHECK(std::abs(a.overlap_5eps - b.overlap_5eps) <= 2);
}

TEST_CASE("nets below 2h are rejected") {
  const auto c = build_cloud(SpaceSpec::interval(101));
  CHECK_THROWS_AS(build_net(c, 0.015), InadmissibleScale);
}

TEST_CASE("partition of unity") {
  for (const auto& spec : {SpaceSpec::interval(201), SpaceSpec::gasket(5), SpaceSpec::square(41)}) {
    const auto c = build_cloud(spec);
    const double eps = 0.1 * c.diameter();
    const auto pou = partition_of_unity(c, build_net(c, eps));
    for (PointId x = 0; x < c.size(); ++x) {
      double s = 0.0;
      for (const auto& e : pou.at(x)) {
        CHECK(e.value > 0.0);
        CHECK(e.value <= 1.0 + 1e-12);
        s += e.value;
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Lip phi_i <= C / eps with C <= 4
    CHECK(pou.lip_constant() <= 4.0);
    // phi_i vanishes outside B(x_i, 2 eps)
    const auto phi = pou.phi(0);
    for (PointId x = 0; x < c.size(); ++x) {
      if (c.distance(x, pou.net().centers[0]) >= 2.0 * eps) CHECK(phi[x] == 0.0);
    }
  }
}

TEST_CASE("mollifier basics") {
  const auto c = build_cloud(SpaceSpec::interval(401));
  const double eps = 0.05;
  const auto pou = partition_of_unity(c, build_net(c, eps));
  SUBCASE("constants are fixed") {
    const auto m = mollify(ScalarField::constant(c, 2.5), pou);
    for (PointId x = 0; x < c.size(); ++x) CHECK(m[x] == doctest::Approx(2.5));
  }
  SUBCASE("linear") {
    const auto f = random_field(c, 1), g = random_field(c, 2);
    const auto lhs = mollify(f * 2.0 + g, pou);
    const auto rhs = mollify(f, pou) * 2.0 + mollify(g, pou);
    CHECK((lhs - rhs).sup_norm() <= 1e-12);
  }
  SUBCASE("sup-norm contraction") {
    const auto f = random_field(c, 3);
    CHECK(mollify(f, pou).sup_norm() <= f.sup_norm() + 1e-12);
  }
  SUBCASE("the line moves by at most eps") {
    const auto f = line(c);
    CHECK((mollify(f, pou) - f).l2_norm() <= eps);
    CHECK((mollify(f, pou) - f).sup_norm() <= 2.0 * eps);
  }
}

TEST_CASE("discrete Lipschitz slope") {
  const auto c = build_cloud(SpaceSpec::interval(101));
  const double r_loc = 0.035;  // neighbours up to 3h
  const auto lip = discrete_lip(line(c), r_loc);
  for (PointId x = 0; x < c.size(); ++x) CHECK(lip[x] == doctest::Approx(1.0));
  // the steepest chord of x^2 from x = 1/2 within 3h ends at x + 3h
  const auto q = discrete_lip(ScalarField::from_coords(c, [](auto p) { return p[0] * p[0]; }), r_loc);
  CHECK(q[50] == doctest::Approx(1.03));
  CHECK(discrete_lip(ScalarField::constant(c, 1.0), r_loc).sup_norm() == 0.0);
  CHECK_THROWS_AS(discrete_lip(line(c), 0.02), InadmissibleScale);
}

TEST_CASE("mollifier estimates") {
  const auto c = build_cloud(SpaceSpec::interval(801));
  const auto spread = [](const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
  };
  const std::vector<ScalarField> fs{
      ScalarField::from_coords(c, [](auto p) { return std::sin(std::numbers::pi * p[0]); }), line(c),
      ScalarField::from_coords(c, [](auto p) { return p[0] > 0.5 ? 1.0 : 0.0; })};
  for (std::size_t k = 0; k < fs.size(); ++k) {
    std::vector<double> lip, l2;
    for (double eps : {0.1, 0.05, 0.025}) {
      const auto m = mollifier_estimates(fs[k], eps);
      CHECK(m.lip_bound_ratio > 0.0);
      CHECK(m.lip_bound_ratio <= 1.0);
      CHECK(m.l2_bound_ratio > 0.0);
      CHECK(m.l2_bound_ratio <= 1.0);
      lip.push_back(m.lip_bound_ratio);
      l2.push_back(m.l2_bound_ratio);
    }
    CHECK(spread(lip) <= 2.0);
    // smooth fields converge at second order, so only the jump saturates the L2 bound
    if (k == 2) CHECK(spread(l2) <= 2.0);
  }
}

TEST_CASE("controlled cutoff quotients stay within a factor 4 across eps") {
  const auto c = build_cloud(SpaceSpec::interval(801));
  const auto grid = ScaleGrid::standard(c);
  std::vector<double> worst;
  for (double eps : {0.1, 0.05}) {
    const auto rep = check_controlled_cutoff(partition_of_unity(c, build_net(c, eps)), 2.0, grid);
    CHECK(rep.per_center.size() == build_net(c, eps).centers.size());
    CHECK(rep.worst > 0.0);
    worst.push_back(rep.worst);
  }
  CHECK(std::max(worst[0], worst[1]) / std::min(worst[0], worst[1]) <= 4.0);
}
