#include "qpo/disc.hpp"
#include "qpo/errors.hpp"
#include "qpo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qpo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

}  // namespace

DiscGrid DiscGrid::geometric(int j_min, int j_max, int n_theta) {
  if (j_min < 1 || j_max < j_min) throw ParameterError("geometric disc grid: need 1 <= j_min <= j_max");
  if (n_theta < 64) throw ParameterError("disc grid: n_theta must be at least 64");
  DiscGrid g;
  g.n_theta = n_theta;
  for (int j = j_min; j <= j_max; ++j) g.radii.push_back(1.0 - std::ldexp(1.0, -j));
  return g;
}

DiscGrid DiscGrid::log_gaps(double gap_max, double gap_min, double per_decade, int n_theta) {
  if (!(gap_max < 1.0 && gap_min > 0.0 && gap_min < gap_max && per_decade > 0.0))
    throw ParameterError("log-gap disc grid: need 0 < gap_min < gap_max < 1");
  if (n_theta < 64) throw ParameterError("disc grid: n_theta must be at least 64");
  DiscGrid g;
  g.n_theta = n_theta;
  const auto gaps = log_uniform_points(gap_min, gap_max, per_decade);
  for (Eigen::Index i = gaps.size() - 1; i >= 0; --i) g.radii.push_back(1.0 - gaps[i]);
  return g;
}

double log_max_modulus(const AnalyticFunctionModel& f, double r, int n_theta) {
  if (r == 0.0) return f.log_abs(0.0);
  if (n_theta < 64) throw ParameterError("max modulus: n_theta must be at least 64");
  auto g = [&](double th) { return f.log_abs(std::polar(r, th)); };
  const double step = 2.0 * kPi / n_theta;
  int best = 0;
  double best_v = -kInf;
  for (int j = 0; j < n_theta; ++j) {
    const double v = g(j * step);
    if (v > best_v) {
      best_v = v;
      best = j;
    }
  }
  // Golden-section refinement on the bracketing cell pair.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = (best - 1) * step, b = (best + 1) * step;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 80 && b - a > 1e-14; ++it) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + phi * (b - a);
      gd = g(d);
    }
  }
  return std::max({best_v, gc, gd});
}

double max_modulus(const AnalyticFunctionModel& f, double r, int n_theta) {
  return std::exp(log_max_modulus(f, r, n_theta));
}

std::vector<MeanResult> integral_means(const AnalyticFunctionModel& f, double r,
                                       const std::vector<double>& p_list, int n_theta,
                                       double rel_tol) {
  for (double p : p_list)
    if (!(p >= 1.0)) throw ParameterError("integral mean: p must be at least 1");
  if (!(r >= 0.0 && r < 1.0)) throw ParameterError("integral mean: r must lie in [0, 1)");
  constexpr int kCap = 1 << 20, kStartCap = 1 << 16;
  int n0 = std::max(n_theta, 64);
  const double need = 8.0 * kPi / (1.0 - r);
  while (n0 < need && n0 < kStartCap) n0 *= 2;
  const std::size_t np = p_list.size();

  double radius = r;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    bool hit = false;
    std::vector<double> sum(np, 0.0);
    auto sample = [&](int n, int j) {
      const double v = std::abs(f.log_abs(std::polar(radius, 2.0 * kPi * j / n)));
      if (!std::isfinite(v)) hit = true;
      for (std::size_t k = 0; k < np; ++k) sum[k] += p_list[k] == 1.0 ? v : std::pow(v, p_list[k]);
    };
    int n = n0;
    for (int j = 0; j < n && !hit; ++j) sample(n, j);
    std::vector<double> mean(np), change(np, kInf);
    for (std::size_t k = 0; k < np; ++k) mean[k] = sum[k] / n;
    int small = 0;
    while (!hit && n < kCap) {
      const int n2 = 2 * n;
      for (int j = 1; j < n2 && !hit; j += 2) sample(n2, j);
      bool all_small = true;
      for (std::size_t k = 0; k < np; ++k) {
        const double m2 = sum[k] / n2;
        change[k] = m2 == mean[k] ? 0.0 : std::abs(m2 - mean[k]) / std::max(std::abs(m2), 1e-300);
        mean[k] = m2;
        if (!(change[k] < rel_tol)) all_small = false;
      }
      n = n2;
      // Two consecutive small changes guard against aliasing.
      small = all_small ? small + 1 : 0;
      if (small >= 2) break;
    }
    if (hit) {
      radius -= (2.0 * kPi / n0) * (1.0 - radius);
      continue;
    }
    std::vector<MeanResult> out;
    for (std::size_t k = 0; k < np; ++k)
      out.push_back({std::pow(mean[k], 1.0 / p_list[k]), n, change[k], radius});
    return out;
  }
  throw NumericError("integral mean: samples kept landing on zeros");
}

MeanResult integral_mean_p(const AnalyticFunctionModel& f, double r, double p, int n_theta,
                           double rel_tol) {
  return integral_means(f, r, {p}, n_theta, rel_tol).front();
}

DiscOrderEstimate orders_from_samples(const std::vector<double>& radii,
                                      const std::vector<double>& log_quantity,
                                      OrderEstimator est, int windows) {
  if (radii.size() != log_quantity.size()) throw ParameterError("order estimate: size mismatch");
  const std::size_t n = radii.size();
  const std::size_t start = n / 2;
  if (n - start < 2) throw ParameterError("order estimate: need at least four radii");
  DiscOrderEstimate out;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(1.0 / (1.0 - radii[i]));
    const double ratio = lx > 0.0 ? log_quantity[i] / lx : 0.0;
    out.rows.push_back({radii[i], log_quantity[i], ratio});
    if (i >= start) {
      x.push_back(lx);
      y.push_back(log_quantity[i]);
    }
  }
  if (est == OrderEstimator::ratio) {
    for (std::size_t i = start; i < n; ++i) out.window_values.push_back(out.rows[i].ratio);
  } else {
    if (windows < 1) throw ParameterError("order estimate: windows must be positive");
    const std::size_t m = x.size();
    const std::size_t w = std::min<std::size_t>(windows, m / 2);
    for (std::size_t k = 0; k < w; ++k) {
      const std::size_t a = k * m / w, b = (k + 1) * m / w;
      out.window_values.push_back(least_squares_slope(
          std::span<const double>(x.data() + a, b - a), std::span<const double>(y.data() + a, b - a)));
    }
  }
  out.upper = *std::max_element(out.window_values.begin(), out.window_values.end());
  out.lower = *std::min_element(out.window_values.begin(), out.window_values.end());
  return out;
}

DiscOrderEstimate disc_orders(const AnalyticFunctionModel& f, const DiscGrid& grid,
                              OrderEstimator est, int windows) {
  std::vector<double> y;
  y.reserve(grid.radii.size());
  for (double r : grid.radii) y.push_back(log_plus(std::max(log_max_modulus(f, r, grid.n_theta), 0.0)));
  return orders_from_samples(grid.radii, y, est, windows);
}

DiscOrderEstimate mean_orders(const AnalyticFunctionModel& f, double p, const DiscGrid& grid,
                              OrderEstimator est, int windows) {
  std::vector<double> y;
  y.reserve(grid.radii.size());
  for (double r : grid.radii) y.push_back(log_plus(integral_mean_p(f, r, p, grid.n_theta).value));
  return orders_from_samples(grid.radii, y, est, windows);
}

double smoothing_integral_I_alpha(const AnalyticFunctionModel& f, double R, double alpha,
                                  double R0, int n_theta) {
  if (!(alpha >= 0.5 && alpha < 1.0)) throw ParameterError("I_alpha: alpha must lie in [1/2, 1)");
  if (!(R0 >= 0.0 && R0 < R && R < 1.0)) throw ParameterError("I_alpha: need 0 <= R0 < R < 1");
  // R - t = u^alpha absorbs the (R - t)^{1/alpha - 1} weight at the right end.
  auto g = [&](double u) {
    const double t = std::max(R - std::pow(u, alpha), 0.0);
    return alpha * std::max(log_max_modulus(f, t, n_theta), 0.0);
  };
  const double body = integrate(g, 0.0, std::pow(R, 1.0 / alpha), 1e-8).value;
  return std::pow(1.0 - R, -1.0 / alpha) * (body + std::max(log_max_modulus(f, R0, n_theta), 0.0));
}

RadialSet::RadialSet(std::vector<std::pair<double, double>> intervals) : iv_(std::move(intervals)) {
  for (std::size_t i = 0; i < iv_.size(); ++i) {
    const auto [a, b] = iv_[i];
    if (!(0.0 <= a && a <= b && b <= 1.0)) throw ParameterError("radial set: intervals must lie in [0, 1]");
    if (i > 0 && a < iv_[i - 1].second)
      throw ParameterError("radial set: intervals must be sorted and disjoint");
  }
}

double RadialSet::measure_from(double r) const {
  double m = 0.0;
  for (const auto& [a, b] : iv_) m += std::max(0.0, b - std::max(a, r));
  return m;
}

double upper_density(const RadialSet& e, const std::vector<double>& r_grid) {
  if (r_grid.empty()) throw ParameterError("upper density: empty radius grid");
  double best = 0.0;
  for (std::size_t i = r_grid.size() / 2; i < r_grid.size(); ++i)
    best = std::max(best, e.measure_from(r_grid[i]) / (1.0 - r_grid[i]));
  return best;
}

}  // namespace qpo
