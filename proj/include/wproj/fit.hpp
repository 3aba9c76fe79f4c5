#pragma once

#include <span>

namespace wproj {

/// Ordinary least squares y = slope * x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  int n = 0;
};

/// Requires >= 3 finite points and nondegenerate x variance.
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

}  // namespace wproj
