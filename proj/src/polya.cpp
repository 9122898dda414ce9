#include "qpo/disc.hpp"
#include "qpo/errors.hpp"
#include "qpo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qpo {

PolyaResult polya_order(const LogPsi& log_psi, const std::vector<double>& log_c,
                        const std::vector<double>& log_x, double log_x_max, double threshold,
                        double resolution, double doubling_limit) {
  if (log_c.empty() || log_x.empty()) throw ParameterError("Polya order: empty sample lists");
  if (!(threshold > 1.0 && resolution > 0.0)) throw ParameterError("Polya order: bad threshold or resolution");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  PolyaResult out{0.0, 0.0, true};

  double dsup = -kInf;
  for (double lx : log_x)
    if (lx + std::log(2.0) <= log_x_max) dsup = std::max(dsup, log_psi(lx + std::log(2.0)) - log_psi(lx));
  out.doubling_sup = std::exp(dsup);
  if (!(out.doubling_sup <= doubling_limit)) {
    out.doubling_bounded = false;
    out.order = kInf;
    return out;
  }

  struct Pair {
    double lc, gain;
  };
  std::vector<Pair> pairs;
  for (double lx : log_x) {
    const double base = log_psi(lx);
    for (double lc : log_c)
      if (lc > 0.0 && lx + lc <= log_x_max) pairs.push_back({lc, log_psi(lx + lc) - base});
  }
  if (pairs.empty()) throw ParameterError("Polya order: no admissible (C, x) pairs");
  const double level = std::log(threshold);
  auto diverges = [&](double rho) {
    return std::any_of(pairs.begin(), pairs.end(),
                       [&](const Pair& p) { return p.gain - rho * p.lc > level; });
  };
  if (!diverges(0.0)) return out;
  double hi = 1.0;
  while (diverges(hi)) {
    hi *= 2.0;
    if (hi > 1e6) {
      out.order = kInf;
      return out;
    }
  }
  double lo = 0.0;
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    (diverges(mid) ? lo : hi) = mid;
  }
  out.order = lo;
  return out;
}

double psi_tilde(const std::function<double(double)>& psi, double t, double rel_tol) {
  if (!(t >= 1.0)) throw ParameterError("psi tilde: t must be at least 1");
  if (t == 1.0) return 0.0;
  return integrate([&](double u) { return psi(std::exp(u)); }, 0.0, std::log(t), rel_tol).value;
}

}  // namespace qpo
