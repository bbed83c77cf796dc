#pragma once

#include <cmath>
#include <optional>
#include <utility>

namespace idoe {

struct RootOptions {
  double bracket_tolerance = 1e-7;
  int max_iterations = 200;
};

/// Root of a monotone function on [lo, hi]. `fdf(x)` returns {f(x), f'(x)}.
/// Bisection shrinks the bracket to `bracket_tolerance`, then Newton steps
/// (kept inside the bracket) polish the root to a few ulp. Returns nullopt
/// when [lo, hi] does not bracket a sign change.
template <typename Fdf>
std::optional<double> bracketed_newton(Fdf&& fdf, double lo, double hi,
                                       const RootOptions& opts = {}) {
  double f_lo = fdf(lo).first;
  double f_hi = fdf(hi).first;
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo < 0.0) == (f_hi < 0.0)) return std::nullopt;
  const bool rising = f_lo < 0.0;

  int iter = 0;
  while (hi - lo > opts.bracket_tolerance && iter < opts.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = fdf(mid).first;
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == rising) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++iter;
  }

  double x = 0.5 * (lo + hi);
  for (; iter < opts.max_iterations; ++iter) {
    const auto [f, df] = fdf(x);
    if (f == 0.0) return x;
    if ((f < 0.0) == rising) {
      lo = x;
    } else {
      hi = x;
    }
    double next = (df != 0.0 && std::isfinite(df)) ? x - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * std::abs(x) * 2.220446049250313e-16 || next == x) {
      return next;
    }
    x = next;
  }
  return x;
}

}  // namespace idoe
