#pragma once

#include "qpo/csv.hpp"
#include "qpo/growth.hpp"
#include "qpo/proximate_order.hpp"
#include "qpo/report.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace qpo {

/// eps_n = eps1 * ratio^{n-1}; eps1 <= 0 selects min{1, eta}/2.
struct EpsRule {
  double eps1 = 0.0;
  double ratio = 0.5;

  double first(double eta) const;
  double operator()(int n, double eta) const;
};

struct StairStep {
  double u;
  double u_star;
  double t_next;
};

struct SequenceLedger {
  double rho = 0.0;
  double lambda = 0.0;
  double eta = 0.0;
  std::vector<double> eps;
  std::vector<double> r;
  std::vector<double> r_prime;
  std::vector<double> r_star;
  std::vector<double> M;
  std::vector<double> R;
  std::vector<double> C;
  std::vector<std::vector<StairStep>> stairs;
  std::vector<bool> stair_clamped;
  std::vector<bool> descending_connector;
  /// First index of the next cycle when it lies below the grid end.
  std::optional<double> r_next;
  /// Level held after the last complete cycle.
  double tail_level = 0.0;
  bool truncated = false;
  std::string notice;

  std::size_t cycles() const { return r_prime.size(); }
  nlohmann::json to_json(bool include_stairs = true) const;
};

/// Construction nodes: the grid together with the breakpoints of A inside it.
std::vector<double> construction_nodes(const GrowthFunction& a, const GridSpec& grid);

/// Anchors (r_n, r_n', r_n*) for every complete cycle below the grid end.
SequenceLedger find_anchor_sequences(const GrowthFunction& a, double rho, double lambda,
                                     double eta, const EpsRule& eps, const GridSpec& grid,
                                     int max_cycles = 64);

struct Excursion {
  double M;
  double R;
  Envelope D;
};

/// Maximum of d on [r_n, r_n*] (on [grid start, r_1*] for the first cycle)
/// and the envelope D on [R_n, r_n*]. `n` is zero-based.
Excursion excursion_profile(const GrowthFunction& a, const GridSpec& grid,
                            const SequenceLedger& ledger, std::size_t n);

struct StairResult {
  std::vector<Segment> segments;
  std::vector<StairStep> steps;
  bool clamped = false;
  double end_value = 0.0;
};

/// Alternating constant and descent pieces on [R, r_star] staying above D.
StairResult stair_descent(const Envelope& D, double R, double r_star, double M, double rho);

struct RiseResult {
  double C = 0.0;
  Segment rise;
  Segment tail;
  bool descending = false;
};

/// Connector on [r_star, r_prime] followed by the constant M_next on
/// [r_prime, r_next].
RiseResult connect_rise(double sigma_at_r_star, double m_next, double r_star, double r_prime,
                        double r_next, double lambda, double eta);

struct QpoBuild {
  std::shared_ptr<const PiecewiseProximateOrder> sigma;
  std::shared_ptr<const AssociatedMajorant> majorant;
  SequenceLedger ledger;
};

QpoBuild build_qpo(const GrowthFunction& a, double rho, double lambda, double eta,
                   const GridSpec& grid, const EpsRule& eps = {},
                   const SmoothingRule& smoothing = {});

/// Sampled sup of |sigma'(t)| t log t over the points and every segment midpoint.
double derivative_witness_sup(const PiecewiseProximateOrder& sigma,
                              const std::vector<double>& points);

/// Checks (a)-(f): C^1, tail levels, derivative bound, monotone A*, sandwich
/// slack on each envelope piece, and A <= t^sigma.
PropertyReport verify_qpo(const PiecewiseProximateOrder& sigma, const AssociatedMajorant& a_star,
                          const GrowthFunction& a, const GridSpec& grid);

struct EtaSweepRow {
  double eta;
  double witness;
  double lower_bound;
};

std::vector<EtaSweepRow> eta_necessity_sweep(double lambda, double rho,
                                             const std::vector<double>& etas,
                                             double t_max = 1e8, double per_decade = 200,
                                             double ramp_fraction = 0.01);

/// Rows t, sigma, t_pow_sigma, A, A_star, deriv_witness on the grid.
CsvTable qpo_table(const PiecewiseProximateOrder& sigma, const AssociatedMajorant& a_star,
                   const GrowthFunction& a, const GridSpec& grid);
void write_qpo_csv(const std::string& path, const PiecewiseProximateOrder& sigma,
                   const AssociatedMajorant& a_star, const GrowthFunction& a,
                   const GridSpec& grid);

}  // namespace qpo
