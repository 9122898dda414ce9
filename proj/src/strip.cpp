#include "qpo/strip.hpp"

#include "qpo/errors.hpp"
#include "qpo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace qpo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// int_{u0}^{u1} g(u) du split at the logs of the breakpoints of l.
double integrate_in_u(const ProximateOrderFunction& l, const std::function<double(double)>& g,
                      double u0, double u1, double rel_tol) {
  std::vector<double> cuts{u0};
  for (double t : l.breakpoints()) {
    const double u = std::log(t);
    if (u > u0 && u < u1) cuts.push_back(u);
  }
  cuts.push_back(u1);
  std::sort(cuts.begin(), cuts.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b - a <= 1e-12 * std::max(1.0, std::abs(b)))
      sum += 0.5 * (g(a) + g(b)) * (b - a);
    else
      sum += integrate(g, a, b, rel_tol).value;
  }
  return sum;
}

}  // namespace

ProximateOrderFunction::ProximateOrderFunction(Sampler l, Sampler scaled_derivative, double t_max,
                                               std::string label)
    : l_(std::move(l)), dl_(std::move(scaled_derivative)), t_max_(t_max), label_(std::move(label)) {
  if (!(t_max_ > std::exp(1.0))) throw ParameterError("proximate order: t_max must exceed e");
  const auto grid = log_uniform_points(std::exp(1.0), t_max_, 50);
  l1_ = kInf;
  l2_ = -kInf;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    witness_ = std::max(witness_, std::abs(dl_(t)));
    if (i < grid.size() / 2) continue;
    const double v = l_(t);
    l1_ = std::min(l1_, v);
    l2_ = std::max(l2_, v);
  }
  if (!(l1_ > 0.0 && std::isfinite(l2_)))
    throw ParameterError("proximate order: tail values must be positive and finite");
}

ProximateOrderFunction ProximateOrderFunction::constant(double c, double t_max) {
  if (!(c > 0.0)) throw ParameterError("proximate order: constant must be positive");
  std::ostringstream label;
  label << "constant(" << c << ")";
  return ProximateOrderFunction([c](double) { return c; }, [](double) { return 0.0; }, t_max,
                                label.str());
}

ProximateOrderFunction ProximateOrderFunction::oscillating(double mean, double amplitude,
                                                           double t_max) {
  if (!(amplitude >= 0.0 && mean - amplitude > 0.0))
    throw ParameterError("proximate order: need 0 <= amplitude < mean");
  const double knee = std::exp(std::exp(1.0));
  auto l = [=](double t) {
    if (t <= knee) return mean;
    return mean + amplitude * std::sin(std::log(std::log(std::log(t))));
  };
  auto dl = [=](double t) {
    if (t <= knee) return 0.0;
    const double ll = std::log(std::log(t));
    return amplitude * std::cos(std::log(ll)) / ll;
  };
  std::ostringstream label;
  label << "oscillating(" << mean << ", " << amplitude << ")";
  ProximateOrderFunction out(l, dl, t_max, label.str());
  out.set_breakpoints({knee});
  return out;
}

ProximateOrderFunction ProximateOrderFunction::from_qpo(
    std::shared_ptr<const PiecewiseProximateOrder> sigma) {
  if (!sigma) throw ParameterError("proximate order: null sigma");
  auto clamp = [sigma](double t) { return std::clamp(t, sigma->start(), sigma->end()); };
  auto l = [sigma, clamp](double t) { return (*sigma)(clamp(t)); };
  auto dl = [sigma](double t) {
    if (t < sigma->start() || t > sigma->end()) return 0.0;
    return sigma->slope_x(log_log(t));
  };
  ProximateOrderFunction out(l, dl, sigma->end(), "qpo");
  std::vector<double> cuts;
  for (const auto& seg : sigma->segments()) cuts.push_back(seg.a);
  for (const auto& b : sigma->blends()) {
    const double h = b.half_width;
    cuts.push_back(std::exp(std::exp(b.x_corner - h)));
    cuts.push_back(std::exp(std::exp(b.x_corner + h)));
  }
  std::sort(cuts.begin(), cuts.end());
  out.set_breakpoints(std::move(cuts));
  return out;
}

void ProximateOrderFunction::check(double t) const {
  if (!(t >= 1.0 && t <= t_max_ * (1.0 + 1e-12))) {
    std::ostringstream msg;
    msg << "proximate order evaluated at t = " << t << " outside [1, " << t_max_ << "]";
    throw DomainError(msg.str());
  }
}

double ProximateOrderFunction::operator()(double t) const {
  check(t);
  return l_(t);
}

double ProximateOrderFunction::scaled_derivative(double t) const {
  check(t);
  return dl_(t);
}

double StripProfile::omega(double u) const { return kPi / (2.0 * (*l)(std::exp(u)) * q); }

double StripProfile::omega_prime(double u) const {
  if (u <= 0.0) return 0.0;
  const double s = std::exp(u);
  const double lv = (*l)(s);
  // d/du l(e^u) = l'(s) s = scaled / log s.
  return -kPi / (2.0 * q) * (l->scaled_derivative(s) / u) / (lv * lv);
}

double StripProfile::u_max() const { return std::log(l->t_max()); }

StripProfile omega_from_l(std::shared_ptr<const ProximateOrderFunction> l, double q) {
  if (!l) throw ParameterError("strip profile: null proximate order");
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("strip profile: q must lie in (0, 1)");
  StripProfile p;
  p.l = std::move(l);
  p.q = q;
  const double u_end = p.u_max();
  auto g = [&p](double u) {
    const double w = p.omega_prime(u);
    return w * w / p.omega(u);
  };
  double total = 0.0, lo = 0.0;
  std::vector<double> steps;
  for (int j = 1; lo < u_end; ++j) {
    const double hi = std::min(j * std::log(10.0), u_end);
    const double step = integrate_in_u(*p.l, g, lo, hi, 1e-10);
    total += step;
    steps.push_back(step);
    p.partial_integrals.push_back(total);
    lo = hi;
  }
  // Cauchy test on the tail windows: increments shrink and the last one is small.
  const std::size_t n = steps.size();
  for (std::size_t i = n / 2 + 1; i < n; ++i)
    if (steps[i] > steps[i - 1] * (1.0 + 1e-9) + 1e-300) p.integrable = false;
  if (n > 0 && steps.back() > 0.05 * total) p.integrable = false;
  return p;
}

std::complex<double> warschawski_map(const StripProfile& profile, double u, double v) {
  if (!(u >= 0.0 && u <= profile.u_max() * (1.0 + 1e-12)))
    throw DomainError("warschawski map: u outside the sampled strip");
  const double w = profile.omega(u);
  if (std::abs(v) > w * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "warschawski map: |v| = " << std::abs(v) << " exceeds omega(u) = " << w;
    throw DomainError(msg.str());
  }
  double re = profile.k;
  if (u > 0.0)
    re += kPi / 2.0 *
          integrate_in_u(*profile.l, [&](double t) { return 1.0 / profile.omega(t); }, 0.0, u, 1e-11);
  return {re, kPi * v / (2.0 * w)};
}

double mean_proximate_order_L(const ProximateOrderFunction& l, double r) {
  if (!(r > 1.0)) throw ParameterError("mean proximate order: r must exceed 1");
  const double lr = std::log(r);
  return integrate_in_u(l, [&](double u) { return l(std::exp(u)); }, 0.0, lr, 1e-11) / lr;
}

double ModulusRelation::lhs() const { return std::exp(log_lhs); }
double ModulusRelation::rhs() const { return std::exp(log_rhs); }

ModulusRelation sector_modulus_relation(const StripProfile& profile, double alpha, double r,
                                        double theta) {
  if (!(alpha > 0.0)) throw ParameterError("modulus relation: alpha must be positive");
  if (!(r > 1.0)) throw ParameterError("modulus relation: r must exceed 1");
  const auto z = warschawski_map(profile, std::log(r), theta);
  // |exp(z / (alpha q))|^alpha = exp(Re z / q).
  const double log_lhs = alpha * (z.real() / (alpha * profile.q));
  const double log_rhs = mean_proximate_order_L(*profile.l, r) * std::log(r) + profile.k / profile.q;
  return {log_lhs, log_rhs};
}

double fit_warschawski_constant(const StripProfile& profile, double r_calibration) {
  const double L = mean_proximate_order_L(*profile.l, r_calibration);
  return profile.q * ((*profile.l)(r_calibration) - L) * std::log(r_calibration);
}

PropertyReport cartwright_witness(const SectorLogModulus& log_g, const ProximateOrderFunction& l,
                                  double q, double delta, const std::vector<double>& r_grid,
                                  double eps, int n_theta, CsvTable* samples) {
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("cartwright witness: q must lie in (0, 1)");
  if (!(eps > 0.0)) throw ParameterError("cartwright witness: eps must be positive");
  if (n_theta < 2) throw ParameterError("cartwright witness: n_theta must be at least 2");
  if (delta <= 0.0) delta = kPi / (4.0 * l.l2() * q);
  if (!(delta < kPi / (2.0 * l.l2() * q)))
    throw ParameterError("cartwright witness: delta must be below pi/(2 l2 q)");

  PropertyCheck hyp("hypothesis");
  hyp.status = CheckStatus::pass;
  hyp.bound = 1.0;
  hyp.measured = -kInf;
  PropertyCheck concl("cartwright_lower_bound");
  concl.status = CheckStatus::pass;
  concl.bound = -1.0;
  concl.measured = kInf;
  nlohmann::json rows = nlohmann::json::array();

  for (double r : r_grid) {
    if (!(r > 1.0)) throw ParameterError("cartwright witness: radii must exceed 1");
    const double lr = l(r);
    const double full = kPi / (2.0 * lr * q);
    const double up = std::pow(r, lr / (1.0 + eps));
    for (int j = 0; j <= n_theta; ++j) {
      const double th = -full + 2.0 * full * j / n_theta;
      const double ratio = log_g(std::polar(r, th)) / up;
      if (ratio > hyp.measured) {
        hyp.measured = ratio;
        hyp.worst_location = r;
      }
    }
    const double half = full - delta;
    if (half <= 0.0) continue;
    const double low = std::pow(r, lr);
    double worst = kInf;
    for (int j = 0; j <= n_theta; ++j) {
      const double th = -half + 2.0 * half * j / n_theta;
      const double v = log_g(std::polar(r, th));
      worst = std::min(worst, v);
      if (samples) samples->rows.push_back({r, th, v, -low});
    }
    rows.push_back({{"r", r}, {"min_log_G", worst}, {"bound", -low}});
    if (worst / low < concl.measured) {
      concl.measured = worst / low;
      concl.worst_location = r;
    }
  }
  if (samples && samples->header.empty()) samples->header = {"r", "theta", "log_mod_G", "bound"};
  hyp.note = "max of log|G| / r^{l(r)/(1+eps)} on the full sector; must stay below 1";
  if (!(hyp.measured < 1.0)) hyp.status = CheckStatus::fail;
  concl.note = "min of log|G| / r^{l(r)} on the shrunken sector; must stay above -1";
  if (!(concl.measured > -1.0)) concl.status = CheckStatus::fail;
  if (hyp.status != CheckStatus::pass) {
    hyp.status = CheckStatus::hypothesis_unmet;
    concl.status = CheckStatus::hypothesis_unmet;
  }
  PropertyReport rep;
  rep.checks = {hyp, concl};
  rep.metrics["delta"] = delta;
  rep.metrics["radii"] = rows;
  return rep;
}

PropertyReport real_part_witness(const AnalyticFunctionModel& f,
                                 const std::function<double(double)>& lambda_r, double eps,
                                 const std::vector<double>& r_grid, int n_theta) {
  if (std::abs(f.value_at_origin()) > 1e-12)
    throw ParameterError("real part witness: f(0) must vanish");
  if (r_grid.size() < 2) throw ParameterError("real part witness: need at least two radii");
  if (n_theta < 8) throw ParameterError("real part witness: n_theta must be at least 8");

  PropertyCheck hyp("hypothesis");
  hyp.status = CheckStatus::pass;
  hyp.bound = 1.0;
  hyp.measured = -kInf;
  PropertyCheck concl("real_part_bound");
  concl.status = CheckStatus::pass;
  concl.bound = 1.0;
  concl.measured = 0.0;
  concl.windowed = true;
  nlohmann::json rows = nlohmann::json::array();

  double lambda_inf = kInf;
  for (std::size_t i = r_grid.size() / 2; i < r_grid.size(); ++i) {
    const double r = r_grid[i];
    if (!(r > 0.0 && r < 1.0)) throw ParameterError("real part witness: radii must lie in (0, 1)");
    const double lam = lambda_r(r);
    lambda_inf = std::min(lambda_inf, lam);
    double max_re = -kInf, max_abs = 0.0;
    for (int j = 0; j < n_theta; ++j) {
      const double re = f.eval(std::polar(r, 2.0 * kPi * j / n_theta)).real();
      max_re = std::max(max_re, re);
      max_abs = std::max(max_abs, std::abs(re));
    }
    const double log_gap = std::log(1.0 - r);
    const double hyp_ratio = max_re * std::exp(lam * log_gap);
    const double concl_ratio = max_abs * std::exp((1.0 + eps) * lam * log_gap);
    if (hyp_ratio > hyp.measured) {
      hyp.measured = hyp_ratio;
      hyp.worst_location = r;
    }
    if (concl_ratio > concl.measured) {
      concl.measured = concl_ratio;
      concl.worst_location = r;
    }
    rows.push_back({{"r", r}, {"max_re", max_re}, {"max_abs_re", max_abs},
                    {"bound", std::exp(-(1.0 + eps) * lam * log_gap)}});
  }
  hyp.note = "max Re f (1-r)^{lambda(r)} over the tail radii; must stay below 1";
  concl.note = "max |Re f| (1-r)^{(1+eps) lambda(r)} over the tail radii; must stay below 1";
  if (!(hyp.measured < 1.0)) hyp.status = CheckStatus::hypothesis_unmet;
  if (!(concl.measured < 1.0)) concl.status = CheckStatus::fail;
  if (!(lambda_inf > 1.0)) {
    hyp.status = CheckStatus::hypothesis_out_of_range;
    concl.status = CheckStatus::hypothesis_out_of_range;
  } else if (hyp.status == CheckStatus::hypothesis_unmet) {
    concl.status = CheckStatus::hypothesis_unmet;
  }
  PropertyReport rep;
  rep.checks = {hyp, concl};
  rep.metrics["lambda_tail_inf"] = lambda_inf;
  rep.metrics["radii"] = rows;
  return rep;
}

}  // namespace qpo
