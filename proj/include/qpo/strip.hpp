#pragma once

#include "qpo/csv.hpp"
#include "qpo/disc.hpp"
#include "qpo/proximate_order.hpp"
#include "qpo/report.hpp"

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace qpo {

/// A proximate order l on [1, t_max] with its tail bounds and derivative
/// witness sup |l'(t)| t log t sampled at 50 points per decade.
class ProximateOrderFunction {
 public:
  using Sampler = std::function<double(double)>;

  /// `scaled_derivative` returns l'(t) t log t.
  ProximateOrderFunction(Sampler l, Sampler scaled_derivative, double t_max, std::string label);

  static ProximateOrderFunction constant(double c, double t_max = 1e12);
  /// mean + amplitude sin(log log log t), frozen at the mean below e^e.
  static ProximateOrderFunction oscillating(double mean, double amplitude, double t_max = 1e12);
  /// sigma extended by its end values outside [start, end].
  static ProximateOrderFunction from_qpo(std::shared_ptr<const PiecewiseProximateOrder> sigma);

  double operator()(double t) const;
  double scaled_derivative(double t) const;
  double t_max() const { return t_max_; }
  double l1() const { return l1_; }
  double l2() const { return l2_; }
  double derivative_witness() const { return witness_; }
  const std::string& label() const { return label_; }
  /// Points where l or its derivative may jump; quadrature splits there.
  const std::vector<double>& breakpoints() const { return breaks_; }
  void set_breakpoints(std::vector<double> t) { breaks_ = std::move(t); }

 private:
  Sampler l_, dl_;
  double t_max_;
  std::string label_;
  double l1_ = 0.0, l2_ = 0.0, witness_ = 0.0;
  std::vector<double> breaks_;
  void check(double t) const;
};

struct StripProfile {
  std::shared_ptr<const ProximateOrderFunction> l;
  double q = 0.5;
  double k = 0.0;
  /// Integrals of (omega')^2 / omega over [0, log 10^j], j = 1, 2, ...
  std::vector<double> partial_integrals;
  bool integrable = true;

  /// omega(u) = pi / (2 l(e^u) q).
  double omega(double u) const;
  double omega_prime(double u) const;
  double u_max() const;
};

StripProfile omega_from_l(std::shared_ptr<const ProximateOrderFunction> l, double q);

/// k + (pi/2) int_0^u dt/omega(t) + i pi v / (2 omega(u)).
std::complex<double> warschawski_map(const StripProfile& profile, double u, double v);

/// int_1^r l(s)/s ds / log r.
double mean_proximate_order_L(const ProximateOrderFunction& l, double r);

struct ModulusRelation {
  double log_lhs;
  double log_rhs;
  double lhs() const;
  double rhs() const;
};

/// lhs = |exp(map(log r, theta) / (alpha q))|^alpha, rhs = r^{L(r)} e^{k/q}.
ModulusRelation sector_modulus_relation(const StripProfile& profile, double alpha, double r,
                                        double theta);

/// k making the modulus relation reproduce r^{l(r)} at the calibration radius:
/// k = q (l(r_c) - L(r_c)) log r_c.
double fit_warschawski_constant(const StripProfile& profile, double r_calibration);

/// log|G(w)| on the sector.
using SectorLogModulus = std::function<double(std::complex<double>)>;

/// Lower bound log|G(re^{i theta})| > -r^{l(r)} on |theta| <= pi/(2 l(r) q) - delta
/// over r_grid. delta <= 0 selects pi/(4 l_2 q). When `samples` is given the
/// shrunken-sector samples are appended as (r, theta, log_mod_G, bound).
PropertyReport cartwright_witness(const SectorLogModulus& log_g, const ProximateOrderFunction& l,
                                  double q, double delta, const std::vector<double>& r_grid,
                                  double eps, int n_theta = 64, CsvTable* samples = nullptr);

/// max |Re f| on each circle against (1-r)^{-(1+eps) lambda(r)} over the tail
/// half of r_grid, given Re f < (1-r)^{-lambda(r)} there.
PropertyReport real_part_witness(const AnalyticFunctionModel& f,
                                 const std::function<double(double)>& lambda_r, double eps,
                                 const std::vector<double>& r_grid, int n_theta = 512);

}  // namespace qpo
