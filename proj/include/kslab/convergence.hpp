#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kslab/energy.hpp"
#include "kslab/field.hpp"
#include "kslab/graphform.hpp"

namespace kslab {

struct ScalePair {
  double eps;
  double r;
};

struct RecoveryStep {
  double eps = 0.0;
  double r = 0.0;
  double energy = 0.0;    // E_{d_w/2,X}(f_eps, r)
  double l2_error = 0.0;  // ||f_eps - f||
  double margin = 0.0;    // energy / oracle
};

struct LiminfStep {
  double r = 0.0;
  std::size_t k = 0;       // index of the perturbing eigenfield
  double amplitude = 0.0;  // a_n actually applied
  double energy = 0.0;     // E_{d_w/2,X}(f + a u_k, r)
  double margin = 0.0;     // energy / oracle
  double max_test_inner = 0.0;  // max_j |<a u_k, g_j>|
};

/// Recovery (strong) and liminf (weak) halves of a Mosco diagnostic against an oracle value
/// for the limit form at f.
struct MoscoReport {
  double oracle = 0.0;
  std::string oracle_source;
  std::vector<RecoveryStep> recovery;
  double recovery_margin = 0.0;     // max_n energy / oracle
  double recovery_spread = 1.0;     // max / min of the margins
  bool strong_trend = false;        // l2 errors decrease, 5% slack per step
  std::vector<LiminfStep> liminf;
  double liminf_margin = 0.0;       // min_n energy / oracle
  double liminf_spread = 1.0;
  bool weak_null = false;           // perturbations pass the weak-nullity test
  bool vacuous = false;             // oracle is zero and f is constant
};

/// f_eps_n from the covering-net mollifier and its energy at r_n, for decreasing admissible pairs.
MoscoReport recovery_check(const ScalarField& f, double d_w, std::span<const ScalePair> pairs, double oracle,
                           std::string oracle_source = "form");

struct ProbeOptions {
  std::size_t first_k = 20;    // perturbation n uses eigenfield first_k + n (n = 1..K)
  double amplitude = 1.0;
  // Scale each perturbation by 1/sqrt(lambda_k), so a u_k / sqrt(lambda_k) has form energy a^2
  // and the probe sequence stays bounded in energy. Off: plain a u_k.
  bool unit_energy = true;
  std::size_t test_fields = 5;
  std::uint64_t seed = 11;
};

/// Weak liminf probes f_n = f + a_n u_{k_n} at scales r_n (one probe per scale). Weak nullity is
/// tested against unit-normalized distance fields d(., p_j) from seeded points p_j, with
/// tolerance 0.05 a_n. Appends to `report` and returns it.
MoscoReport& weak_liminf_probe(MoscoReport& report, const ScalarField& f, double d_w, const Spectrum& spec,
                               std::span<const double> scales, const ProbeOptions& opts = {});

struct CompactnessProbe {
  std::size_t family_size = 0;
  double cap = 0.0;
  double delta = 0.0;
  std::size_t net_size = 0;
  std::vector<std::size_t> net;        // indices into the family, in selection order
  std::vector<double> budgets;         // ||f||^2 + liminf_proxy per field
};

/// Greedy farthest-point delta-net in L^2. Throws std::invalid_argument if a field exceeds the cap.
CompactnessProbe compactness_probe(std::span<const ScalarField> fields, double d_w, double cap, double delta,
                                   const ScaleGrid& grid, int window = 3);

struct SobolevReport {
  bool sup_branch = false;  // Q <= d_w
  double q = 0.0;           // Lebesgue exponent 2Q/(Q - d_w) when Q > d_w
  double theta = 0.0;       // Q/d_w when Q <= d_w
  std::vector<double> quotients;
  double max_quotient = 0.0;
};

/// Q > d_w: ||f||_q / (||f||_2 + E^{1/2}); Q <= d_w: ||f||_inf / ((||f||_2 + E^{1/2})^theta ||f||_2^{1-theta}),
/// with E the liminf proxy over `grid`. Constant fields are rejected.
SobolevReport sobolev_check(std::span<const ScalarField> fields, double d_w, double q_dim, const ScaleGrid& grid,
                            int window = 3);

}  // namespace kslab
