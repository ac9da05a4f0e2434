#pragma once

#include <span>

namespace sglab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;  // NaN for two points (no residual dof)
  double r2 = 0.0;
  int points = 0;
};

// Ordinary least squares y = intercept + slope x. Throws DegenerateInputError
// for fewer than two points or constant x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// Fit of log y against log x; every value must be positive.
LinearFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace sglab
