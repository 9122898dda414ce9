#include "qpo/disc.hpp"
#include "qpo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qpo {

namespace {

constexpr double kPi = std::numbers::pi;

void check_radius(double r) {
  if (!(r >= 0.0 && r < 1.0)) throw ParameterError("zero count: r must lie in [0, 1)");
}

// Arguments of the zeros with r <= |a| <= (1+r)/2.
std::vector<double> annulus_arguments(const ZeroSequence& zeros, double r) {
  const double hi = 0.5 * (1.0 + r);
  std::vector<double> args;
  for (const auto& a : zeros.points()) {
    const double m = std::abs(a);
    if (m >= r * (1.0 - 1e-15) && m <= hi * (1.0 + 1e-15)) args.push_back(std::arg(a));
  }
  return args;
}

}  // namespace

int zero_count_polar(const ZeroSequence& zeros, double r, double angle_tol) {
  check_radius(r);
  auto args = annulus_arguments(zeros, r);
  if (args.empty()) return 0;
  const double width = 2.0 * (kPi / 4.0) * (1.0 - r);
  std::sort(args.begin(), args.end());
  const std::size_t m = args.size();
  std::vector<double> ext(args);
  for (double a : args) ext.push_back(a + 2.0 * kPi);
  std::size_t best = 0, j = 0;
  for (std::size_t i = 0; i < m; ++i) {
    j = std::max(j, i);
    while (j < i + m && ext[j] <= args[i] + width + angle_tol) ++j;
    best = std::max(best, j - i);
  }
  return static_cast<int>(best);
}

int zero_count_polar_brute(const ZeroSequence& zeros, double r, int anchors, double angle_tol) {
  check_radius(r);
  if (anchors < 1) throw ParameterError("zero count: anchors must be positive");
  const auto args = annulus_arguments(zeros, r);
  const double delta = (kPi / 4.0) * (1.0 - r);
  int best = 0;
  for (int k = 0; k < anchors; ++k) {
    const double phi = 2.0 * kPi * k / anchors;
    int c = 0;
    for (double a : args)
      if (std::abs(std::remainder(a - phi, 2.0 * kPi)) <= delta + angle_tol) ++c;
    best = std::max(best, c);
  }
  return best;
}

int zero_count_disc(const ZeroSequence& zeros, cplx center, double h) {
  if (!(h > 0.0) || !(std::abs(center) + h < 1.0))
    throw ParameterError("zero count: the disc must lie inside the unit disc");
  return static_cast<int>(std::count_if(zeros.points().begin(), zeros.points().end(),
                                        [&](cplx a) { return std::abs(a - center) <= h; }));
}

}  // namespace qpo
