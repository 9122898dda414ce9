#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <span>
#include <utility>

namespace qpo {

inline double log_log(double t) { return std::log(std::log(t)); }

/// Points uniform in log t from `start` to `end` inclusive, `per_decade` per
/// factor of ten.
Eigen::ArrayXd log_uniform_points(double start, double end, double per_decade);

/// Bisection on a bracket [lo, hi] with pred(lo) != pred(hi). Returns the
/// final bracket, shrunk until hi - lo <= rel_tol * max(|lo|, |hi|).
template <class Pred>
std::pair<double, double> bisect_bracket(Pred&& pred, double lo, double hi,
                                         double rel_tol = 1e-12) {
  const bool left = pred(lo);
  for (int it = 0; it < 200; ++it) {
    if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi))) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid) == left)
      lo = mid;
    else
      hi = mid;
  }
  return {lo, hi};
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod (G15/K31) on [a, b] with relative tolerance.
/// Throws NumericError when the error estimate stays above the tolerance.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double rel_tol = 1e-10,
                           unsigned max_depth = 20);

/// Ordinary least squares slope of y against x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

}  // namespace qpo
