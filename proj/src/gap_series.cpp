#include "qpo/disc.hpp"
#include "qpo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qpo {

GapSeriesBuild gap_series_from_profile(const std::function<double(double)>& profile,
                                       const std::vector<double>& sample_radii, double degree_cap,
                                       double r_max) {
  if (sample_radii.size() < 2) throw ParameterError("gap series: need at least two sample radii");
  std::vector<double> r(sample_radii);
  std::sort(r.begin(), r.end());
  if (!(r.front() > 0.0 && r.back() < 1.0))
    throw ParameterError("gap series: sample radii must lie in (0, 1)");
  if (std::adjacent_find(r.begin(), r.end()) != r.end())
    throw ParameterError("gap series: sample radii must be distinct");

  std::vector<double> x(r.size()), b(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    x[i] = std::log(r[i]);
    b[i] = profile(r[i]);
    if (!std::isfinite(b[i])) throw NumericError("gap series: profile is not finite at a sample");
  }

  // Lower convex hull, monotone chain.
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < r.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t p = hull[hull.size() - 2], q = hull.back();
      const double cross = (x[q] - x[p]) * (b[i] - b[p]) - (b[q] - b[p]) * (x[i] - x[p]);
      if (cross <= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }

  GapSeriesBuild out{AnalyticFunctionModel::closed_form(ClosedForm::constant, {1.0}, 0.0), {}, {}};
  std::vector<bool> on_hull(r.size(), false);
  for (auto i : hull) {
    on_hull[i] = true;
    out.contact_radii.push_back(r[i]);
  }
  for (std::size_t i = 0; i < r.size(); ++i)
    if (!on_hull[i]) out.dropped_radii.push_back(r[i]);

  std::vector<double> exps{0.0};
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    const std::size_t p = hull[k], q = hull[k + 1];
    const double n = std::round((b[q] - b[p]) / (x[q] - x[p]));
    if (n > exps.back()) exps.push_back(n);
  }
  auto log_coeff = [&](double n) {
    double m = std::numeric_limits<double>::infinity();
    for (auto i : hull) m = std::min(m, b[i] - n * x[i]);
    return m;
  };
  std::vector<double> keep_e, keep_c, drop_e, drop_c;
  for (double n : exps) {
    if (n <= degree_cap) {
      keep_e.push_back(n);
      keep_c.push_back(log_coeff(n));
    } else {
      drop_e.push_back(n);
      drop_c.push_back(log_coeff(n));
    }
  }
  const double rm = r_max > 0.0 ? r_max : r.back();
  out.model = AnalyticFunctionModel::gap_series(std::move(keep_e), std::move(keep_c), rm,
                                                std::move(drop_e), std::move(drop_c));
  return out;
}

double log_max_term(const AnalyticFunctionModel& series, double r) {
  if (series.kind() != "gap_series") throw ParameterError("max term: model is not a gap series");
  if (!(r > 0.0 && r < 1.0)) throw ParameterError("max term: r must lie in (0, 1)");
  const auto& e = series.exponents();
  const auto& c = series.log_coefficients();
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < e.size(); ++j) m = std::max(m, c[j] + e[j] * std::log(r));
  return m;
}

ZeroSequence gap_series_zeros(const AnalyticFunctionModel& series, double radius_limit,
                              std::size_t max_count) {
  if (series.kind() != "gap_series") throw ParameterError("gap series zeros: model is not a gap series");
  if (!(radius_limit > 0.0 && radius_limit <= series.r_max()))
    throw ParameterError("gap series zeros: radius_limit must lie in (0, r_max]");
  const auto& e = series.exponents();
  const auto& c = series.log_coefficients();

  // Upper envelope of the lines c_j + n_j x for x < 0, slopes increasing.
  std::vector<std::size_t> env;
  auto cross_x = [&](std::size_t i, std::size_t j) { return (c[i] - c[j]) / (e[j] - e[i]); };
  for (std::size_t j = 0; j < e.size(); ++j) {
    while (env.size() >= 2 && cross_x(env[env.size() - 2], j) <= cross_x(env[env.size() - 2], env.back()))
      env.pop_back();
    env.push_back(j);
  }

  std::vector<cplx> pts;
  double complete = radius_limit;
  for (std::size_t k = 0; k + 1 < env.size(); ++k) {
    const std::size_t i = env[k], j = env[k + 1];
    const double rc = std::exp(cross_x(i, j));
    if (rc >= radius_limit) break;
    const auto delta = static_cast<std::size_t>(e[j] - e[i]);
    if (pts.size() + delta > max_count) {
      complete = rc;
      break;
    }
    for (std::size_t m = 0; m < delta; ++m) {
      const double th = (std::numbers::pi + 2.0 * std::numbers::pi * m) / static_cast<double>(delta);
      const cplx z0 = std::polar(rc, th);
      cplx z = z0;
      bool ok = false;
      for (int it = 0; it < 30; ++it) {
        const cplx d = series.log_derivative(z);
        const cplx step = 1.0 / d;
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
        z -= step;
        if (!(std::abs(z) < series.r_max())) break;
        if (std::abs(step) < 1e-14 * std::abs(z)) {
          ok = true;
          break;
        }
      }
      // Keep the balance point when Newton wanders to another root.
      if (!ok || std::abs(z - z0) > 0.5 * rc * 2.0 * std::numbers::pi / static_cast<double>(delta))
        z = z0;
      pts.push_back(z);
    }
  }
  return ZeroSequence(std::move(pts), complete);
}

}  // namespace qpo
