#include "kslab/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kernels.hpp"

namespace kslab {

namespace {

constexpr std::uint32_t kNoCenter = ~std::uint32_t{0};

double kernel_psi(double t) { return std::clamp(2.0 - t, 0.0, 1.0); }

double safe_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace

CoveringNet build_net(const MeasuredPointCloud& cloud, double eps) {
  if (eps < 2.0 * cloud.mesh()) {
    throw InadmissibleScale("build_net: eps must be at least twice the mesh");
  }
  CoveringNet net;
  net.eps = eps;
  const std::size_t n = cloud.size();
  std::vector<std::uint32_t> center_of(n, kNoCenter);
  std::vector<PointId> members;
  for (std::size_t p = 0; p < n; ++p) {
    cloud.ball_members(static_cast<PointId>(p), eps, members, false);
    const bool covered = std::any_of(members.begin(), members.end(),
                                     [&](PointId y) { return center_of[y] != kNoCenter; });
    if (!covered) {
      center_of[p] = static_cast<std::uint32_t>(net.centers.size());
      net.centers.push_back(static_cast<PointId>(p));
    }
  }

  std::vector<char> covered(n, 0);
  std::vector<int> overlap(n, 0);
  for (PointId c : net.centers) {
    cloud.ball_members(c, eps, members, false);
    for (PointId y : members) covered[y] = 1;
    cloud.ball_members(c, 5.0 * eps, members, false);
    for (PointId y : members) ++overlap[y];
  }
  net.cover_ok = std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; });
  net.overlap_5eps = *std::max_element(overlap.begin(), overlap.end());
  return net;
}

PartitionOfUnity::PartitionOfUnity(const MeasuredPointCloud& cloud, CoveringNet net)
    : cloud_(&cloud), net_(std::move(net)) {
  if (!net_.cover_ok) throw std::invalid_argument("partition_of_unity: net does not cover the cloud");
  const std::size_t n = cloud.size();
  const double eps = net_.eps;

  std::vector<std::vector<Entry>> lists(n);
  std::vector<PointId> members;
  for (std::size_t i = 0; i < net_.centers.size(); ++i) {
    const PointId c = net_.centers[i];
    cloud.ball_members(c, 2.0 * eps, members, true);
    for (PointId y : members) {
      const double psi = kernel_psi(cloud.distance(c, y) / eps);
      if (psi > 0.0) lists[y].push_back({static_cast<std::uint32_t>(i), psi});
    }
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t x = 0; x < n; ++x) {
    double total = 0.0;
    for (const Entry& e : lists[x]) total += e.value;
    if (!(total > 0.0)) {
      throw std::logic_error("partition_of_unity: uncovered point despite cover_ok");
    }
    for (Entry& e : lists[x]) e.value /= total;
    offsets_[x + 1] = offsets_[x] + lists[x].size();
  }
  entries_.reserve(offsets_[n]);
  for (auto& l : lists) entries_.insert(entries_.end(), l.begin(), l.end());

  // Discrete slope of every bump at the admissible floor.
  const double r_loc = cloud.admissible_floor();
  double worst = 0.0;
#pragma omp parallel
  {
    std::vector<PointId> nb;
    double local = 0.0;
#pragma omp for schedule(dynamic, 64)
    for (std::ptrdiff_t xi = 0; xi < static_cast<std::ptrdiff_t>(n); ++xi) {
      const auto x = static_cast<PointId>(xi);
      cloud.ball_members(x, r_loc, nb, false);
      const auto ex = at(x);
      for (PointId y : nb) {
        if (y == x) continue;
        const double d = cloud.distance(x, y);
        const auto ey = at(y);
        // Merge the two sorted entry lists; absent entries are zero.
        std::size_t a = 0, b = 0;
        while (a < ex.size() || b < ey.size()) {
          double vx = 0.0, vy = 0.0;
          if (b == ey.size() || (a < ex.size() && ex[a].center < ey[b].center)) {
            vx = ex[a++].value;
          } else if (a == ex.size() || ey[b].center < ex[a].center) {
            vy = ey[b++].value;
          } else {
            vx = ex[a++].value;
            vy = ey[b++].value;
          }
          local = std::max(local, std::abs(vx - vy) / d);
        }
      }
    }
#pragma omp critical
    worst = std::max(worst, local);
  }
  lip_constant_ = worst * eps;
}

std::span<const PartitionOfUnity::Entry> PartitionOfUnity::at(PointId x) const {
  return {entries_.data() + offsets_[x], offsets_[x + 1] - offsets_[x]};
}

ScalarField PartitionOfUnity::phi(std::size_t center) const {
  std::vector<double> v(cloud_->size(), 0.0);
  for (std::size_t x = 0; x < v.size(); ++x) {
    for (const Entry& e : at(static_cast<PointId>(x))) {
      if (e.center == center) v[x] = e.value;
    }
  }
  return ScalarField(*cloud_, std::move(v));
}

PartitionOfUnity partition_of_unity(const MeasuredPointCloud& cloud, const CoveringNet& net) {
  return PartitionOfUnity(cloud, net);
}

ScalarField mollify(const ScalarField& f, const PartitionOfUnity& pou) {
  const MeasuredPointCloud& cloud = pou.cloud();
  require_same_cloud(f, cloud, "mollify");
  const auto& centers = pou.net().centers;
  std::vector<double> avg(centers.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(centers.size()); ++i) {
    avg[i] = ball_average(cloud, f.values(), cloud.ball(centers[i], pou.net().eps));
  }
  std::vector<double> out(cloud.size(), 0.0);
  for (std::size_t x = 0; x < out.size(); ++x) {
    double s = 0.0;
    for (const auto& e : pou.at(static_cast<PointId>(x))) s += e.value * avg[e.center];
    out[x] = s;
  }
  return ScalarField(cloud, std::move(out));
}

ScalarField discrete_lip(const ScalarField& f, double r_loc) {
  const MeasuredPointCloud& cloud = f.cloud();
  if (r_loc < cloud.admissible_floor()) {
    throw InadmissibleScale("discrete_lip: r_loc below the admissible floor");
  }
  const std::size_t n = cloud.size();
  std::vector<double> out(n, 0.0);
  bool lonely = false;
#pragma omp parallel
  {
    std::vector<PointId> nb;
#pragma omp for schedule(dynamic, 64) reduction(|| : lonely)
    for (std::ptrdiff_t xi = 0; xi < static_cast<std::ptrdiff_t>(n); ++xi) {
      const auto x = static_cast<PointId>(xi);
      cloud.ball_members(x, r_loc, nb, false);
      if (nb.size() < 2) lonely = true;
      double m = 0.0;
      for (PointId y : nb) {
        if (y != x) m = std::max(m, std::abs(f[x] - f[y]) / cloud.distance(x, y));
      }
      out[xi] = m;
    }
  }
  if (lonely) throw InadmissibleScale("discrete_lip: some ball contains only its center");
  return ScalarField(cloud, std::move(out));
}

MollifierReport mollifier_estimates(const ScalarField& f, double eps) {
  const MeasuredPointCloud& cloud = f.cloud();
  MollifierReport rep;
  rep.eps = eps;
  const CoveringNet net = build_net(cloud, eps);
  const PartitionOfUnity pou(cloud, net);
  const ScalarField feps = mollify(f, pou);
  const ScalarField lip = discrete_lip(feps, cloud.admissible_floor());

  rep.lip_numerator = lip.l2_norm_squared();
  // int avg_{B(x,2eps)} |df|^2 / eps^2 = 4 * E(f, 2eps) with d_w = 2.
  rep.lip_denominator = 4.0 * detail::ordered_sum(detail::density_kernel(f, 2.0 * eps, 2.0, Region::all()));
  rep.lip_bound_ratio = safe_ratio(rep.lip_numerator, rep.lip_denominator);

  rep.l2_numerator = (feps - f).l2_norm_squared();
  const std::size_t n = cloud.size();
  std::vector<double> osc(n);
#pragma omp parallel
  {
    std::vector<PointId> nb;
#pragma omp for schedule(dynamic, 32)
    for (std::ptrdiff_t xi = 0; xi < static_cast<std::ptrdiff_t>(n); ++xi) {
      const auto x = static_cast<PointId>(xi);
      cloud.ball_members(x, 6.0 * eps, nb, false);
      double mass = 0.0, acc = 0.0;
      for (PointId y : nb) {
        mass += cloud.weight(y);
        acc += cloud.weight(y) * std::abs(f[x] - f[y]);
      }
      const double a = acc / mass;
      osc[xi] = cloud.weight(x) * a * a;
    }
  }
  rep.l2_denominator = detail::ordered_sum(osc);
  rep.l2_bound_ratio = safe_ratio(rep.l2_numerator, rep.l2_denominator);
  return rep;
}

CutoffReport check_controlled_cutoff(const PartitionOfUnity& pou, double d_w, const ScaleGrid& grid,
                                     int window) {
  const MeasuredPointCloud& cloud = pou.cloud();
  if (!(d_w >= 2.0)) throw std::invalid_argument("check_controlled_cutoff: d_w must be >= 2");
  std::vector<double> adm = grid.admissible(cloud);
  if (adm.empty()) throw InadmissibleScale("check_controlled_cutoff: no admissible scale");
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(window, 1)), adm.size());
  const std::vector<double> scales(adm.end() - static_cast<std::ptrdiff_t>(w), adm.end());

  CutoffReport rep;
  rep.eps = pou.net().eps;
  rep.d_w = d_w;
  const double eps = rep.eps;
  for (std::size_t i = 0; i < pou.center_count(); ++i) {
    const ScalarField phi = pou.phi(i);
    const PointId c = pou.net().centers[i];
    double limsup = 0.0;
    for (double r : scales) {
      // Densities vanish identically outside B(c, 2 eps + r).
      const Region support = Region::ball(cloud, c, 2.0 * eps + r);
      limsup = std::max(limsup, detail::ordered_sum(detail::density_kernel(phi, r, d_w, support)));
    }
    const double q = limsup * std::pow(eps, d_w) / cloud.ball_mass(c, eps);
    rep.per_center.push_back(q);
    rep.worst = std::max(rep.worst, q);
  }
  return rep;
}

}  // namespace kslab
