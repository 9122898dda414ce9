#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

namespace qpo {

enum class SegmentKind { constant, loglog_descent, loglog_rise };

const char* to_string(SegmentKind k);

/// sigma(t) = start_value + slope * (log log t - anchor_x) on [a, b].
struct Segment {
  double a = 0.0;
  double b = 0.0;
  SegmentKind kind = SegmentKind::constant;
  double anchor_x = 0.0;
  double start_value = 0.0;
  double slope = 0.0;

  double value_x(double x) const { return start_value + slope * (x - anchor_x); }

  static Segment constant(double a, double b, double value);
  /// Line in x = log log t through (log log anchor, value) with the given slope.
  static Segment loglog(SegmentKind kind, double a, double b, double anchor, double value,
                        double slope);
};

/// Cubic Hermite blend in x = log log t over [x_corner - half_width, x_corner + half_width].
struct Blend {
  double t_corner = 0.0;
  double x_corner = 0.0;
  double half_width = 0.0;
};

struct SmoothingRule {
  /// Window half-width as a fraction of the shorter adjoining segment (in log t).
  double fraction = 0.01;
  /// Upper cap on the half-width in log t.
  double max_log_width = 0.1;
};

class PiecewiseProximateOrder {
 public:
  PiecewiseProximateOrder(std::vector<Segment> segments, double rho, double lambda,
                          double eta);

  double operator()(double t) const { return value_x(std::log(std::log(t))); }
  double value_x(double x) const;
  /// d sigma / d(log log t), i.e. sigma'(t) t log t.
  double slope_x(double x) const;
  double derivative_witness(double t) const {
    return std::abs(slope_x(std::log(std::log(t))));
  }

  double start() const { return segments_.front().a; }
  double end() const { return segments_.back().b; }
  double rho() const { return rho_; }
  double lambda() const { return lambda_; }
  double eta() const { return eta_; }
  const std::vector<Segment>& segments() const { return segments_; }
  /// blends()[i] sits at the junction between segments i and i+1.
  const std::vector<Blend>& blends() const { return blends_; }
  bool smoothed() const { return smoothed_; }
  bool windows_shrunk() const { return windows_shrunk_; }
  /// max{sup of rise slopes, rho + 1}.
  double derivative_bound() const;

  /// Largest |left value - right value| over junctions of the unblended pieces.
  double max_junction_gap() const;

  struct CornerDefect {
    double value_gap = 0.0;
    double slope_gap = 0.0;
    double t = 0.0;
  };
  /// One-sided value and slope mismatches at every blend edge and unblended
  /// junction, returned as the worst of each.
  CornerDefect worst_corner_defect() const;

 private:
  friend PiecewiseProximateOrder smooth_corners(const PiecewiseProximateOrder&,
                                                const SmoothingRule&,
                                                const std::function<double(double)>*);
  std::size_t locate_x(double x) const;
  double hermite(std::size_t j, double x, bool derivative) const;

  std::vector<Segment> segments_;
  std::vector<double> end_x_;
  std::vector<Blend> blends_;
  double rho_, lambda_, eta_;
  bool smoothed_ = false;
  bool windows_shrunk_ = false;
};

/// C^1 smoothing of every corner. When `barrier` is given, windows at concave
/// corners are halved until the blend stays above barrier(t) at sampled points.
PiecewiseProximateOrder smooth_corners(const PiecewiseProximateOrder& sigma,
                                       const SmoothingRule& rule = {},
                                       const std::function<double(double)>* barrier = nullptr);

/// D(t) = max{sup of d over [t, end], floor} on a node set, with log^+ A
/// interpolated linearly in log t between nodes. Nonincreasing and continuous.
class Envelope {
 public:
  Envelope(std::vector<double> t, std::vector<double> log_a_plus, double floor);

  double operator()(double t) const;
  double start() const { return t_.front(); }
  double end() const { return t_.back(); }
  double floor() const { return floor_; }
  /// Smallest node strictly greater than t, or end().
  double next_node(double t) const;

 private:
  std::vector<double> t_, l_, q_, suffix_;
  double floor_;
};

/// A*(t) = t^{D_n(t)} on each [R_n, r_n*], t^{sigma(t)} elsewhere.
class AssociatedMajorant {
 public:
  struct Piece {
    double a;
    double b;
    Envelope envelope;
  };

  AssociatedMajorant(std::shared_ptr<const PiecewiseProximateOrder> sigma,
                     std::vector<Piece> pieces);

  double log_value(double t) const;
  double operator()(double t) const { return std::exp(log_value(t)); }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const PiecewiseProximateOrder& sigma() const { return *sigma_; }
  /// Index of the envelope piece containing t, or -1.
  int piece_index(double t) const;

 private:
  std::shared_ptr<const PiecewiseProximateOrder> sigma_;
  std::vector<Piece> pieces_;
};

}  // namespace qpo
