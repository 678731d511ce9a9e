#pragma once

#include <vector>

#include "kslab/field.hpp"

namespace kslab::detail {

// e_r(x) with normalization r^{-exponent}; exponent 0 gives the raw nonlocal sums.
std::vector<double> density_kernel(const ScalarField& f, double r, double exponent, const Region& region);

// Sum in the order of `values` (fixed, thread-count independent).
inline double ordered_sum(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

}  // namespace kslab::detail
