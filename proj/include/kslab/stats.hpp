#pragma once

#include <span>

namespace kslab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
};

/// Ordinary least squares y ~ intercept + slope * x. Requires at least two distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

double median(std::span<const double> values);

}  // namespace kslab
