#pragma once

#include <json.hpp>

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace qpo {

/// A(t) = coefficient * t^exponent.
struct PowerLaw {
  double coefficient = 1.0;
  double exponent = 1.0;
};

/// A(t) = t^{mean + amplitude * sin(log log log t)}; the exponent is frozen at
/// `mean` below t = e^e where log log log t is undefined or negative.
struct OscillatingPower {
  double mean = 1.5;
  double amplitude = 0.5;
};

struct ConstantGrowth {
  double value = 1.0;
};

/// Knot table interpolated monotonically in (log t, log A).
struct TableGrowth {
  std::vector<double> t;
  std::vector<double> a;
};

/// Staircase r_n^rho on (r_n, r_{n+1} - w_n] with linear ramps of width
/// w_n = ramp_fraction * (r_{n+1} - r_n) ending at each knot.
struct StepWithRamps {
  double lambda = 1.0;
  double rho = 2.0;
  double ramp_fraction = 0.01;
  std::vector<double> knots;
};

using GrowthRule =
    std::variant<PowerLaw, OscillatingPower, ConstantGrowth, TableGrowth, StepWithRamps>;

class GrowthFunction {
 public:
  GrowthFunction(GrowthRule rule, double domain_start, double domain_end);

  double operator()(double t) const;
  /// log A(t); avoids overflow for large exponents.
  double log_value(double t) const;

  double domain_start() const { return start_; }
  double domain_end() const { return end_; }
  const GrowthRule& rule() const { return rule_; }
  double outer_power() const { return power_; }

  /// Points inside the domain where A is not smooth (knots, ramp starts).
  std::vector<double> breakpoints() const;

  /// A^c for c > 0.
  GrowthFunction raised(double c) const;

  std::string kind() const;
  nlohmann::json to_json() const;
  static GrowthFunction from_json(const nlohmann::json& j);

 private:
  struct TableInterp;
  double base_log_value(double t) const;

  GrowthRule rule_;
  double start_;
  double end_;
  double power_ = 1.0;
  std::shared_ptr<const TableInterp> table_;
};

struct GridSpec {
  std::vector<double> points;
  double per_decade = 0.0;

  /// Uniform in log t; requires start >= e.
  static GridSpec log_uniform(double start, double end, double per_decade);
};

/// d(t) = max(log A(t), 0) / log t for t >= e.
double growth_index(const GrowthFunction& a, double t);

struct WindowRow {
  double t_end;
  double running_sup;
  double running_inf;
};

struct OrderEstimate {
  double rho_hat = 0.0;
  double lambda_hat = 0.0;
  std::vector<WindowRow> window_report;
};

/// Windowed sup/inf of d over the tail half of the grid. The breakpoints of A
/// that fall inside the tail are added to the sample set so that narrow ramps
/// are not skipped.
OrderEstimate estimate_orders(const GrowthFunction& a, const GridSpec& grid,
                              int windows = 32);

/// Step function with ramps: r_1 = 2, r_{n+1} = r_n^{rho/lambda}, on [e, t_max].
GrowthFunction build_counterexample(double lambda, double rho,
                                    double ramp_fraction = 0.01,
                                    double t_max = 1e12);

}  // namespace qpo
