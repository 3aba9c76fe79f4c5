#include "wproj/fit.hpp"

#include <cmath>

#include "wproj/errors.hpp"

namespace wproj {

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InputError("fit_line: size mismatch");
  if (xs.size() < 3) throw InputError("fit_line: need at least 3 points");
  const int n = static_cast<int>(xs.size());
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(xs[static_cast<std::size_t>(i)]) ||
        !std::isfinite(ys[static_cast<std::size_t>(i)])) {
      throw InputError("fit_line: non-finite sample");
    }
    sx += xs[static_cast<std::size_t>(i)];
    sy += ys[static_cast<std::size_t>(i)];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    const double dx = xs[static_cast<std::size_t>(i)] - mx;
    const double dy = ys[static_cast<std::size_t>(i)] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw InputError("fit_line: degenerate x variance");

  LineFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (int i = 0; i < n; ++i) {
    const double e = ys[static_cast<std::size_t>(i)] -
                     (f.slope * xs[static_cast<std::size_t>(i)] + f.intercept);
    ss_res += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  if (f.r2 < 0.0) f.r2 = 0.0;
  f.slope_stderr = n > 2 ? std::sqrt((ss_res / (n - 2)) / sxx) : 0.0;
  return f;
}

}  // namespace wproj
