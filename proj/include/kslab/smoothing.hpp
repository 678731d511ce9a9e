#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kslab/energy.hpp"
#include "kslab/field.hpp"

namespace kslab {

/// Maximal eps-separated set, built greedily in id order.
struct CoveringNet {
  double eps = 0.0;
  std::vector<PointId> centers;
  bool cover_ok = false;     // every point lies in some open B(x_i, eps)
  int overlap_5eps = 0;      // max_x #{i : x in B(x_i, 5 eps)}
};

/// Throws InadmissibleScale when eps < 2h.
CoveringNet build_net(const MeasuredPointCloud& cloud, double eps);

/// phi_i = psi_i / sum_j psi_j with psi_i(x) = clamp(2 - d(x, x_i)/eps, 0, 1).
/// Stored sparsely: each point keeps the (center index, value) pairs with phi_i(x) > 0.
class PartitionOfUnity {
 public:
  struct Entry {
    std::uint32_t center;
    double value;
  };

  PartitionOfUnity(const MeasuredPointCloud& cloud, CoveringNet net);

  const MeasuredPointCloud& cloud() const { return *cloud_; }
  const CoveringNet& net() const { return net_; }
  std::size_t center_count() const { return net_.centers.size(); }
  std::span<const Entry> at(PointId x) const;
  ScalarField phi(std::size_t center) const;

  /// C such that every phi_i has discrete Lipschitz slope (at r_loc = kappa*h) at most C/eps.
  double lip_constant() const { return lip_constant_; }

 private:
  const MeasuredPointCloud* cloud_;
  CoveringNet net_;
  std::vector<std::size_t> offsets_;
  std::vector<Entry> entries_;
  double lip_constant_ = 0.0;
};

PartitionOfUnity partition_of_unity(const MeasuredPointCloud& cloud, const CoveringNet& net);

/// f_eps = sum_i f_{B(x_i, eps)} phi_i.
ScalarField mollify(const ScalarField& f, const PartitionOfUnity& pou);

/// (Lip_h f)(x) = max_{y in B(x, r_loc), y != x} |f(x) - f(y)| / d(x, y).
ScalarField discrete_lip(const ScalarField& f, double r_loc);

struct MollifierReport {
  double eps = 0.0;
  double lip_numerator = 0.0;    // ||Lip_h f_eps||^2
  double lip_denominator = 0.0;  // int avg_{B(x,2eps)} |f(x)-f(y)|^2 / eps^2
  double lip_bound_ratio = 0.0;
  double l2_numerator = 0.0;     // ||f_eps - f||^2
  double l2_denominator = 0.0;   // int (avg_{B(x,6eps)} |f(x)-f(y)|)^2
  double l2_bound_ratio = 0.0;
};

MollifierReport mollifier_estimates(const ScalarField& f, double eps);

struct CutoffReport {
  double eps = 0.0;
  double d_w = 2.0;
  double worst = 0.0;
  std::vector<double> per_center;  // limsup_proxy(phi_i) eps^{d_w} / mu(B_i^eps)
};

/// Controlled-cutoff quotients for every bump of the partition, using the `window` smallest
/// admissible scales of `grid` for the limsup proxy.
CutoffReport check_controlled_cutoff(const PartitionOfUnity& pou, double d_w, const ScaleGrid& grid,
                                     int window = 3);

}  // namespace kslab
