#include "qpo/numerics.hpp"

#include "qpo/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Dense>

#include <limits>
#include <sstream>

namespace qpo {

Eigen::ArrayXd log_uniform_points(double start, double end, double per_decade) {
  if (!(start > 0.0) || !(end > start) || !(per_decade > 0.0))
    throw ParameterError("log_uniform_points: need 0 < start < end and per_decade > 0");
  const double decades = std::log10(end / start);
  const auto count = static_cast<Eigen::Index>(std::ceil(decades * per_decade)) + 1;
  Eigen::ArrayXd pts(count);
  const double ls = std::log(start), le = std::log(end);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(count - 1);
    pts[i] = std::exp(ls + s * (le - ls));
  }
  pts[0] = start;
  pts[count - 1] = end;
  return pts;
}

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double rel_tol, unsigned max_depth) {
  using boost::math::quadrature::gauss_kronrod;
  QuadratureResult out;
  if (a == b) return out;
  QuadratureResult best{0.0, std::numeric_limits<double>::infinity()};
  double best_l1 = 0.0;
  auto attempt = [&](unsigned depth) {
    double l1 = 0.0;
    out.value = gauss_kronrod<double, 31>::integrate(f, a, b, depth, rel_tol, &out.error, &l1);
    if (!std::isfinite(out.value))
      throw NumericError("quadrature produced a non-finite value");
    if (out.error < best.error) {
      best = out;
      best_l1 = l1;
    }
    // Absolute floor keeps integrals of (near-)zero integrands from failing.
    const double allowed = std::max(rel_tol * best_l1, 1e-300) * 10.0 + 1e-14 * best_l1;
    return best.error <= allowed || best.error <= 1e-12;
  };
  // Depth is raised in steps: Boost's error estimate can grow with depth once
  // the request is below roundoff, and a shallower pass may already suffice.
  for (unsigned depth : {0u, 2u, 4u, 6u, 8u, 12u, 16u})
    if (depth < max_depth && attempt(depth)) return best;
  if (attempt(max_depth)) return best;
  std::ostringstream msg;
  msg << "quadrature did not converge on [" << a << ", " << b
      << "]: achieved error " << best.error << " vs requested " << rel_tol * best_l1;
  throw NumericError(msg.str());
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ParameterError("least_squares_slope: need two or more paired samples");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = x[static_cast<std::size_t>(i)];
    rhs[i] = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  return coef[1];
}

}  // namespace qpo
