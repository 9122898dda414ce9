#include "qpo/proximate_order.hpp"

#include "qpo/errors.hpp"
#include "qpo/numerics.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace qpo {

const char* to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::constant: return "constant";
    case SegmentKind::loglog_descent: return "loglog_descent";
    case SegmentKind::loglog_rise: return "loglog_rise";
  }
  return "unknown";
}

Segment Segment::constant(double a, double b, double value) {
  return {a, b, SegmentKind::constant, log_log(a), value, 0.0};
}

Segment Segment::loglog(SegmentKind kind, double a, double b, double anchor, double value,
                        double slope) {
  return {a, b, kind, log_log(anchor), value, slope};
}

PiecewiseProximateOrder::PiecewiseProximateOrder(std::vector<Segment> segments, double rho,
                                                 double lambda, double eta)
    : segments_(std::move(segments)), rho_(rho), lambda_(lambda), eta_(eta) {
  if (segments_.empty()) throw ParameterError("proximate order: no segments");
  if (!(segments_.front().a > 1.0))
    throw ParameterError("proximate order: segments must start above t = 1");
  end_x_.reserve(segments_.size());
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!(s.b > s.a)) {
      std::ostringstream msg;
      msg << "proximate order: empty segment [" << s.a << ", " << s.b << "] at index " << i;
      throw ParameterError(msg.str());
    }
    if (i > 0 && s.a != segments_[i - 1].b)
      throw ParameterError("proximate order: segments must tile without gaps or overlaps");
    end_x_.push_back(log_log(s.b));
  }
  blends_.resize(segments_.size() - 1);
  for (std::size_t j = 0; j + 1 < segments_.size(); ++j) {
    blends_[j].t_corner = segments_[j].b;
    blends_[j].x_corner = end_x_[j];
  }
}

std::size_t PiecewiseProximateOrder::locate_x(double x) const {
  const double x0 = log_log(segments_.front().a);
  if (!(x >= x0 - 1e-15 && x <= end_x_.back() + 1e-15)) {
    std::ostringstream msg;
    msg << "proximate order evaluated outside [" << start() << ", " << end() << "]";
    throw DomainError(msg.str());
  }
  auto it = std::lower_bound(end_x_.begin(), end_x_.end(), x);
  if (it == end_x_.end()) --it;
  return static_cast<std::size_t>(it - end_x_.begin());
}

double PiecewiseProximateOrder::hermite(std::size_t j, double x, bool derivative) const {
  const auto& bl = blends_[j];
  const double h = bl.half_width;
  const double xl = bl.x_corner - h, xr = bl.x_corner + h;
  const double yl = segments_[j].value_x(xl), yr = segments_[j + 1].value_x(xr);
  const double ml = segments_[j].slope, mr = segments_[j + 1].slope;
  const double H = xr - xl;
  const double s = (x - xl) / H;
  const double s2 = s * s, s3 = s2 * s;
  if (!derivative) {
    return (2 * s3 - 3 * s2 + 1) * yl + (s3 - 2 * s2 + s) * H * ml + (-2 * s3 + 3 * s2) * yr +
           (s3 - s2) * H * mr;
  }
  return (6 * s2 - 6 * s) * (yl - yr) / H + (3 * s2 - 4 * s + 1) * ml + (3 * s2 - 2 * s) * mr;
}

double PiecewiseProximateOrder::value_x(double x) const {
  const std::size_t i = locate_x(x);
  if (i > 0 && blends_[i - 1].half_width > 0.0 &&
      std::abs(x - blends_[i - 1].x_corner) < blends_[i - 1].half_width)
    return hermite(i - 1, x, false);
  if (i < blends_.size() && blends_[i].half_width > 0.0 &&
      std::abs(x - blends_[i].x_corner) < blends_[i].half_width)
    return hermite(i, x, false);
  return segments_[i].value_x(x);
}

double PiecewiseProximateOrder::slope_x(double x) const {
  const std::size_t i = locate_x(x);
  if (i > 0 && blends_[i - 1].half_width > 0.0 &&
      std::abs(x - blends_[i - 1].x_corner) < blends_[i - 1].half_width)
    return hermite(i - 1, x, true);
  if (i < blends_.size() && blends_[i].half_width > 0.0 &&
      std::abs(x - blends_[i].x_corner) < blends_[i].half_width)
    return hermite(i, x, true);
  return segments_[i].slope;
}

double PiecewiseProximateOrder::derivative_bound() const {
  double k = rho_ + 1.0;
  for (const auto& s : segments_)
    if (s.kind == SegmentKind::loglog_rise) k = std::max(k, s.slope);
  return k;
}

double PiecewiseProximateOrder::max_junction_gap() const {
  double gap = 0.0;
  for (std::size_t j = 0; j + 1 < segments_.size(); ++j)
    gap = std::max(gap, std::abs(segments_[j].value_x(end_x_[j]) -
                                 segments_[j + 1].value_x(end_x_[j])));
  return gap;
}

PiecewiseProximateOrder::CornerDefect PiecewiseProximateOrder::worst_corner_defect() const {
  CornerDefect worst;
  auto note = [&](double vg, double sg, double t) {
    if (vg > worst.value_gap || sg > worst.slope_gap) worst.t = t;
    worst.value_gap = std::max(worst.value_gap, vg);
    worst.slope_gap = std::max(worst.slope_gap, sg);
  };
  for (std::size_t j = 0; j + 1 < segments_.size(); ++j) {
    const auto& bl = blends_[j];
    const auto& left = segments_[j];
    const auto& right = segments_[j + 1];
    if (bl.half_width > 0.0) {
      const double xl = bl.x_corner - bl.half_width, xr = bl.x_corner + bl.half_width;
      note(std::abs(left.value_x(xl) - hermite(j, xl, false)),
           std::abs(left.slope - hermite(j, xl, true)), bl.t_corner);
      note(std::abs(right.value_x(xr) - hermite(j, xr, false)),
           std::abs(right.slope - hermite(j, xr, true)), bl.t_corner);
    } else {
      note(std::abs(left.value_x(bl.x_corner) - right.value_x(bl.x_corner)),
           std::abs(left.slope - right.slope), bl.t_corner);
    }
  }
  return worst;
}

PiecewiseProximateOrder smooth_corners(const PiecewiseProximateOrder& sigma,
                                       const SmoothingRule& rule,
                                       const std::function<double(double)>* barrier) {
  PiecewiseProximateOrder out = sigma;
  const auto& segs = out.segments_;
  const std::size_t nj = out.blends_.size();
  if (nj == 0) {
    out.smoothed_ = true;
    return out;
  }
  std::vector<double> width(nj, 0.0);
  for (std::size_t j = 0; j < nj; ++j) {
    const auto& l = segs[j];
    const auto& r = segs[j + 1];
    const double xc = out.end_x_[j];
    const bool corner = l.slope != r.slope || l.value_x(xc) != r.value_x(xc);
    if (!corner) continue;
    const double len_l = std::log(l.b) - std::log(l.a);
    const double len_r = std::log(r.b) - std::log(r.a);
    const double w = std::min(rule.fraction * std::min(len_l, len_r), rule.max_log_width);
    width[j] = w / std::log(l.b);
  }
  // Neighbouring windows must not overlap inside a segment.
  for (std::size_t i = 1; i + 1 < segs.size(); ++i) {
    const double len_x = out.end_x_[i] - out.end_x_[i - 1];
    const double used = width[i - 1] + width[i];
    if (used > 0.5 * len_x) {
      const double scale = 0.5 * len_x / used;
      width[i - 1] *= scale;
      width[i] *= scale;
      out.windows_shrunk_ = true;
    }
  }
  for (std::size_t j = 0; j < nj; ++j) out.blends_[j].half_width = width[j];

  if (barrier) {
    for (std::size_t j = 0; j < nj; ++j) {
      auto& bl = out.blends_[j];
      if (bl.half_width == 0.0 || !(segs[j + 1].slope < segs[j].slope)) continue;
      for (int attempt = 0; attempt < 60; ++attempt) {
        bool ok = true;
        for (int k = 0; k <= 8 && ok; ++k) {
          const double x = bl.x_corner - bl.half_width + bl.half_width * k / 4.0;
          const double t = std::exp(std::exp(x));
          ok = out.hermite(j, x, false) >= (*barrier)(t);
        }
        if (ok) break;
        bl.half_width *= 0.5;
        out.windows_shrunk_ = true;
      }
    }
  }
  out.smoothed_ = true;
  return out;
}

Envelope::Envelope(std::vector<double> t, std::vector<double> log_a_plus, double floor)
    : t_(std::move(t)), q_(std::move(log_a_plus)), floor_(floor) {
  if (t_.size() != q_.size() || t_.size() < 2)
    throw ParameterError("envelope: need two or more nodes");
  for (std::size_t i = 1; i < t_.size(); ++i)
    if (!(t_[i] > t_[i - 1])) throw ParameterError("envelope: nodes must increase strictly");
  if (!(t_.front() > 1.0)) throw ParameterError("envelope: nodes must exceed 1");
  l_.resize(t_.size());
  suffix_.assign(t_.size() + 1, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < t_.size(); ++i) l_[i] = std::log(t_[i]);
  for (std::size_t i = t_.size(); i-- > 0;) suffix_[i] = std::max(suffix_[i + 1], q_[i] / l_[i]);
}

double Envelope::operator()(double t) const {
  if (t <= t_.front()) return std::max(floor_, suffix_[0]);
  if (t >= t_.back()) return std::max(floor_, suffix_[t_.size() - 1]);
  const auto i = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin()) - 1;
  const double l = std::log(t);
  const double q = q_[i] + (q_[i + 1] - q_[i]) * (l - l_[i]) / (l_[i + 1] - l_[i]);
  return std::max({floor_, q / l, suffix_[i + 1]});
}

double Envelope::next_node(double t) const {
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  return it == t_.end() ? t_.back() : *it;
}

AssociatedMajorant::AssociatedMajorant(std::shared_ptr<const PiecewiseProximateOrder> sigma,
                                       std::vector<Piece> pieces)
    : sigma_(std::move(sigma)), pieces_(std::move(pieces)) {
  if (!sigma_) throw ParameterError("majorant: missing proximate order");
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (!(pieces_[i].b > pieces_[i].a)) throw ParameterError("majorant: empty envelope piece");
    if (i > 0 && pieces_[i].a < pieces_[i - 1].b)
      throw ParameterError("majorant: envelope pieces must be ordered and disjoint");
  }
}

int AssociatedMajorant::piece_index(double t) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double v, const Piece& p) { return v < p.a; });
  if (it == pieces_.begin()) return -1;
  --it;
  return t <= it->b ? static_cast<int>(it - pieces_.begin()) : -1;
}

double AssociatedMajorant::log_value(double t) const {
  const int k = piece_index(t);
  if (k >= 0) return pieces_[static_cast<std::size_t>(k)].envelope(t) * std::log(t);
  return (*sigma_)(t)*std::log(t);
}

}  // namespace qpo
