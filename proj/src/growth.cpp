#include "qpo/growth.hpp"

#include "qpo/errors.hpp"
#include "qpo/numerics.hpp"

#include <cmath>
// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

namespace qpo {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

using Pchip = boost::math::interpolators::pchip<std::vector<double>>;

// Index j with knots[j] < t <= knots[j+1]; clamps to the ends.
std::size_t knot_cell(const std::vector<double>& knots, double t) {
  auto it = std::lower_bound(knots.begin(), knots.end(), t);
  if (it == knots.begin()) return 0;
  if (it == knots.end()) return knots.size() - 1;
  return static_cast<std::size_t>(it - knots.begin()) - 1;
}

double step_log_value(const StepWithRamps& s, double t) {
  const auto& k = s.knots;
  if (t <= k.front()) return s.rho * std::log(k.front());
  if (t >= k.back()) return s.rho * std::log(k.back());
  const std::size_t j = knot_cell(k, t);
  const double lo = k[j], hi = k[j + 1];
  const double width = s.ramp_fraction * (hi - lo);
  const double ramp_start = hi - width;
  const double log_lo = s.rho * std::log(lo);
  if (t <= ramp_start) return log_lo;
  const double frac = std::min(1.0, (t - ramp_start) / width);
  const double log_hi = s.rho * std::log(hi);
  // log((1-frac) a0 + frac a1) written relative to a1 so it cannot overflow.
  return log_hi + std::log(frac + (1.0 - frac) * std::exp(log_lo - log_hi));
}

}  // namespace

struct GrowthFunction::TableInterp {
  std::vector<double> x;
  std::vector<double> y;
  std::optional<Pchip> spline;

  double operator()(double lt) const {
    if (spline) return (*spline)(lt);
    if (lt <= x.front()) return y.front();
    if (lt >= x.back()) return y.back();
    const std::size_t j = knot_cell(x, lt);
    const double s = (lt - x[j]) / (x[j + 1] - x[j]);
    return y[j] + s * (y[j + 1] - y[j]);
  }
};

GrowthFunction::GrowthFunction(GrowthRule rule, double domain_start, double domain_end)
    : rule_(std::move(rule)), start_(domain_start), end_(domain_end) {
  if (!(domain_start > 0.0) || !(domain_end >= domain_start))
    throw ParameterError("growth function: need 0 < domain_start <= domain_end");
  std::visit(
      overloaded{
          [](const PowerLaw& p) {
            if (!(p.coefficient > 0.0) || !(p.exponent >= 0.0))
              throw ParameterError("power_law: need coefficient > 0 and exponent >= 0");
          },
          [](const OscillatingPower& p) {
            if (!(p.amplitude >= 0.0) || !(p.mean - p.amplitude >= 0.0))
              throw ParameterError("oscillating_power: need 0 <= amplitude <= mean");
          },
          [](const ConstantGrowth& c) {
            if (!(c.value > 0.0)) throw ParameterError("constant: value must be positive");
          },
          [this](const TableGrowth& tab) {
            if (tab.t.size() != tab.a.size() || tab.t.size() < 2)
              throw ParameterError("table: need two or more (t, A) pairs of equal length");
            auto interp = std::make_shared<TableInterp>();
            for (std::size_t i = 0; i < tab.t.size(); ++i) {
              if (!(tab.t[i] > 0.0) || !(tab.a[i] > 0.0))
                throw ParameterError("table: knots and values must be positive");
              if (i > 0 && !(tab.t[i] > tab.t[i - 1]))
                throw ParameterError("table: t knots must be strictly increasing");
              if (i > 0 && tab.a[i] < tab.a[i - 1])
                throw ParameterError("table: A values must be non-decreasing");
              interp->x.push_back(std::log(tab.t[i]));
              interp->y.push_back(std::log(tab.a[i]));
            }
            if (interp->x.size() >= 4) {
              auto xs = interp->x;
              auto ys = interp->y;
              interp->spline.emplace(std::move(xs), std::move(ys));
            }
            table_ = std::move(interp);
          },
          [](const StepWithRamps& s) {
            if (s.knots.size() < 2)
              throw ParameterError("step_with_ramps: need two or more knots");
            if (!(s.ramp_fraction > 0.0 && s.ramp_fraction < 1.0))
              throw ParameterError("step_with_ramps: ramp_fraction must lie in (0, 1)");
            if (!std::is_sorted(s.knots.begin(), s.knots.end()) ||
                std::adjacent_find(s.knots.begin(), s.knots.end()) != s.knots.end())
              throw ParameterError("step_with_ramps: knots must be strictly increasing");
          },
      },
      rule_);
}

double GrowthFunction::base_log_value(double t) const {
  return std::visit(
      overloaded{
          [t](const PowerLaw& p) { return std::log(p.coefficient) + p.exponent * std::log(t); },
          [t](const OscillatingPower& p) {
            const double lt = std::log(t);
            double e = p.mean;
            if (t > std::exp(std::numbers::e)) e += p.amplitude * std::sin(std::log(std::log(lt)));
            return e * lt;
          },
          [](const ConstantGrowth& c) { return std::log(c.value); },
          [this, t](const TableGrowth&) { return (*table_)(std::log(t)); },
          [t](const StepWithRamps& s) { return step_log_value(s, t); },
      },
      rule_);
}

double GrowthFunction::log_value(double t) const {
  if (!(t >= start_ && t <= end_)) {
    std::ostringstream msg;
    msg << "growth function evaluated at t = " << t << " outside [" << start_ << ", "
        << end_ << "]";
    throw DomainError(msg.str());
  }
  return power_ * base_log_value(t);
}

double GrowthFunction::operator()(double t) const { return std::exp(log_value(t)); }

std::vector<double> GrowthFunction::breakpoints() const {
  std::vector<double> out;
  auto keep = [&](double t) {
    if (t > start_ && t < end_) out.push_back(t);
  };
  if (const auto* s = std::get_if<StepWithRamps>(&rule_)) {
    for (std::size_t j = 0; j + 1 < s->knots.size(); ++j) {
      const double w = s->ramp_fraction * (s->knots[j + 1] - s->knots[j]);
      keep(s->knots[j + 1] - w);
      keep(s->knots[j + 1]);
    }
  } else if (const auto* tab = std::get_if<TableGrowth>(&rule_)) {
    for (double t : tab->t) keep(t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GrowthFunction GrowthFunction::raised(double c) const {
  if (!(c > 0.0)) throw ParameterError("raised: exponent must be positive");
  GrowthFunction out = *this;
  out.power_ *= c;
  return out;
}

std::string GrowthFunction::kind() const {
  return std::visit(overloaded{
                        [](const PowerLaw&) { return std::string("power_law"); },
                        [](const OscillatingPower&) { return std::string("oscillating_power"); },
                        [](const ConstantGrowth&) { return std::string("constant"); },
                        [](const TableGrowth&) { return std::string("table"); },
                        [](const StepWithRamps&) { return std::string("step_with_ramps"); },
                    },
                    rule_);
}

nlohmann::json GrowthFunction::to_json() const {
  nlohmann::json params = std::visit(
      overloaded{
          [](const PowerLaw& p) {
            return nlohmann::json{{"coefficient", p.coefficient}, {"exponent", p.exponent}};
          },
          [](const OscillatingPower& p) {
            return nlohmann::json{{"mean", p.mean}, {"amplitude", p.amplitude}};
          },
          [](const ConstantGrowth& c) { return nlohmann::json{{"value", c.value}}; },
          [](const TableGrowth& t) { return nlohmann::json{{"t", t.t}, {"a", t.a}}; },
          [](const StepWithRamps& s) {
            return nlohmann::json{{"lambda", s.lambda},
                                  {"rho", s.rho},
                                  {"ramp_fraction", s.ramp_fraction},
                                  {"knots", s.knots}};
          },
      },
      rule_);
  if (power_ != 1.0) params["power"] = power_;
  return {{"kind", kind()}, {"params", params}, {"domain", {start_, end_}}};
}

GrowthFunction GrowthFunction::from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const auto& p = j.at("params");
    const auto domain = j.at("domain").get<std::vector<double>>();
    if (domain.size() != 2) throw ParameterError("growth function: domain must be [t0, Tmax]");
    GrowthRule rule;
    if (kind == "power_law")
      rule = PowerLaw{p.value("coefficient", 1.0), p.at("exponent").get<double>()};
    else if (kind == "oscillating_power")
      rule = OscillatingPower{p.at("mean").get<double>(), p.at("amplitude").get<double>()};
    else if (kind == "constant")
      rule = ConstantGrowth{p.at("value").get<double>()};
    else if (kind == "table")
      rule = TableGrowth{p.at("t").get<std::vector<double>>(), p.at("a").get<std::vector<double>>()};
    else if (kind == "step_with_ramps")
      rule = StepWithRamps{p.at("lambda").get<double>(), p.at("rho").get<double>(),
                           p.at("ramp_fraction").get<double>(),
                           p.at("knots").get<std::vector<double>>()};
    else
      throw ParameterError("growth function: unknown kind '" + kind + "'");
    GrowthFunction g(std::move(rule), domain[0], domain[1]);
    if (p.contains("power")) g = g.raised(p.at("power").get<double>());
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("growth function JSON: ") + e.what());
  }
}

GridSpec GridSpec::log_uniform(double start, double end, double per_decade) {
  if (start < std::numbers::e)
    throw DomainError("grid must start at t >= e");
  const Eigen::ArrayXd pts = log_uniform_points(start, end, per_decade);
  GridSpec g;
  g.points.assign(pts.data(), pts.data() + pts.size());
  g.per_decade = per_decade;
  return g;
}

double growth_index(const GrowthFunction& a, double t) {
  if (!(t >= std::numbers::e)) throw DomainError("growth index requires t >= e");
  return std::max(a.log_value(t), 0.0) / std::log(t);
}

OrderEstimate estimate_orders(const GrowthFunction& a, const GridSpec& grid, int windows) {
  const auto& pts = grid.points;
  if (pts.size() < 100)
    throw ConfigError({"grid: estimate_orders needs at least 100 points, got " +
                       std::to_string(pts.size())});
  if (windows < 1) throw ConfigError({"windows: must be positive"});
  const std::size_t half = pts.size() / 2;
  std::vector<double> nodes(pts.begin() + static_cast<std::ptrdiff_t>(half), pts.end());
  for (double b : a.breakpoints())
    if (b > nodes.front() && b < nodes.back()) nodes.push_back(b);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  OrderEstimate est;
  est.rho_hat = -std::numeric_limits<double>::infinity();
  est.lambda_hat = std::numeric_limits<double>::infinity();
  const double lo = std::log(nodes.front()), hi = std::log(nodes.back());
  std::size_t i = 0;
  for (int w = 1; w <= windows; ++w) {
    const double edge = w == windows ? nodes.back() : std::exp(lo + (hi - lo) * w / windows);
    while (i < nodes.size() && nodes[i] <= edge) {
      const double d = growth_index(a, nodes[i]);
      est.rho_hat = std::max(est.rho_hat, d);
      est.lambda_hat = std::min(est.lambda_hat, d);
      ++i;
    }
    if (std::isfinite(est.rho_hat)) est.window_report.push_back({edge, est.rho_hat, est.lambda_hat});
  }
  return est;
}

GrowthFunction build_counterexample(double lambda, double rho, double ramp_fraction,
                                    double t_max) {
  if (!(lambda > 0.0)) throw ParameterError("counterexample: lambda must be positive");
  if (!(lambda < rho)) throw ParameterError("counterexample: need lambda < rho");
  if (!(ramp_fraction > 0.0 && ramp_fraction < 1.0))
    throw ParameterError("counterexample: ramp_fraction must lie in (0, 1)");
  if (!(t_max > std::numbers::e)) throw ParameterError("counterexample: t_max must exceed e");
  StepWithRamps s{lambda, rho, ramp_fraction, {2.0}};
  while (s.knots.back() < t_max) {
    const double next = std::pow(s.knots.back(), rho / lambda);
    if (!std::isfinite(next)) throw NumericError("counterexample: knot overflow");
    s.knots.push_back(next);
  }
  return GrowthFunction(std::move(s), std::numbers::e, t_max);
}

}  // namespace qpo
