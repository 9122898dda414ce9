#include "qpo/construction.hpp"

#include "qpo/csv.hpp"
#include "qpo/errors.hpp"
#include "qpo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace qpo {

namespace {

void check_parameters(double rho, double lambda, double eta, double eps1, double ratio) {
  if (!(lambda >= 0.0) || !(rho > lambda))
    throw ParameterError("construction: need 0 <= lambda < rho");
  if (!(eta > 0.0 && eta < rho - lambda))
    throw ParameterError("construction: need 0 < eta < rho - lambda");
  if (!(eps1 > 0.0 && eps1 < std::min(1.0, eta)))
    throw ParameterError("construction: need 0 < eps_1 < min{1, eta}");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ParameterError("construction: eps ratio must lie in (0, 1)");
}

// First t in (lo, hi] with pred(t), given !pred(lo) and pred(hi).
template <class Pred>
double crossing(Pred&& pred, double lo, double hi) {
  if (pred(lo)) return lo;
  return bisect_bracket(pred, lo, hi, 1e-12).second;
}

double log_a_plus(const GrowthFunction& a, double t) { return std::max(a.log_value(t), 0.0); }

}  // namespace

double EpsRule::first(double eta) const {
  return eps1 > 0.0 ? eps1 : std::min(1.0, eta) / 2.0;
}

double EpsRule::operator()(int n, double eta) const {
  return first(eta) * std::pow(ratio, n - 1);
}

nlohmann::json SequenceLedger::to_json(bool include_stairs) const {
  nlohmann::json j{{"rho", rho},         {"lambda", lambda},
                   {"eta", eta},         {"eps", eps},
                   {"r", r},             {"r_prime", r_prime},
                   {"r_star", r_star},   {"M", M},
                   {"R", R},             {"C", C},
                   {"tail_level", tail_level},
                   {"truncated", truncated}};
  j["r_next"] = r_next ? nlohmann::json(*r_next) : nlohmann::json(nullptr);
  j["stair_clamped"] = stair_clamped;
  j["descending_connector"] = descending_connector;
  if (!notice.empty()) j["notice"] = notice;
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& s : stairs) counts.push_back(s.size());
  j["stair_counts"] = counts;
  if (include_stairs) {
    nlohmann::json all = nlohmann::json::array();
    for (const auto& s : stairs) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& st : s) rows.push_back({st.u, st.u_star, st.t_next});
      all.push_back(std::move(rows));
    }
    j["stairs"] = std::move(all);
  }
  return j;
}

std::vector<double> construction_nodes(const GrowthFunction& a, const GridSpec& grid) {
  const auto& pts = grid.points;
  if (pts.size() < 2) throw ParameterError("construction: grid needs two or more points");
  if (pts.front() < a.domain_start() || pts.back() > a.domain_end())
    throw DomainError("construction: grid extends outside the domain of A");
  std::vector<double> nodes = pts;
  for (double b : a.breakpoints())
    if (b > pts.front() && b < pts.back()) nodes.push_back(b);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

SequenceLedger find_anchor_sequences(const GrowthFunction& a, double rho, double lambda,
                                     double eta, const EpsRule& eps, const GridSpec& grid,
                                     int max_cycles) {
  check_parameters(rho, lambda, eta, eps.first(eta), eps.ratio);
  const std::vector<double> nodes = construction_nodes(a, grid);
  std::vector<double> dv(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) dv[i] = growth_index(a, nodes[i]);
  auto d = [&a](double t) { return growth_index(a, t); };
  auto first_index = [&](std::size_t from, auto&& pred) {
    for (std::size_t i = from; i < nodes.size(); ++i)
      if (pred(dv[i])) return i;
    return nodes.size();
  };
  auto index_after = [&](double t) {
    return static_cast<std::size_t>(std::upper_bound(nodes.begin(), nodes.end(), t) -
                                    nodes.begin());
  };

  SequenceLedger L;
  L.rho = rho;
  L.lambda = lambda;
  L.eta = eta;
  const double down_level = lambda + eta / 2.0;
  const double star_power = (lambda + eta / 2.0) / (lambda + eta);

  const double level1 = rho - eps(1, eta);
  const std::size_t i1 = first_index(0, [&](double v) { return v >= level1; });
  if (i1 == nodes.size()) {
    std::ostringstream msg;
    msg << "growth index never reaches rho - eps_1 = " << level1 << " below t = "
        << nodes.back();
    throw InfeasibleError(msg.str());
  }
  double r_cur = i1 == 0 ? nodes[0]
                         : crossing([&](double t) { return d(t) >= level1; }, nodes[i1 - 1],
                                    nodes[i1]);
  int n = 1;
  while (true) {
    if (static_cast<int>(L.cycles()) >= max_cycles) {
      L.r_next = r_cur;
      L.truncated = true;
      L.notice = "cycle limit reached";
      break;
    }
    // Down-crossing of lambda + eta/2 whose partner r* still exceeds r_n;
    // earlier candidates are skipped (greedy thinning).
    std::optional<double> rp, rs;
    std::size_t j = index_after(r_cur);
    while (j < nodes.size()) {
      const std::size_t k = first_index(j, [&](double v) { return v <= down_level; });
      if (k == nodes.size()) break;
      const double lo = std::max(r_cur, nodes[k - 1]);
      const double cand = crossing([&](double t) { return d(t) <= down_level; }, lo, nodes[k]);
      const double cand_star = std::exp(star_power * std::log(cand));
      if (cand_star > r_cur) {
        rp = cand;
        rs = cand_star;
        break;
      }
      j = first_index(k + 1, [&](double v) { return v > down_level; });
    }
    if (!rp) {
      if (n == 1) {
        std::ostringstream msg;
        msg << "growth index has no admissible down-crossing of lambda + eta/2 = "
            << down_level << " below t = " << nodes.back();
        throw InfeasibleError(msg.str());
      }
      L.r_next = r_cur;
      L.truncated = true;
      L.notice = "no down-crossing of lambda + eta/2 after r_" + std::to_string(n) +
                 " below the grid end; cycle left incomplete";
      break;
    }
    L.eps.push_back(eps(n, eta));
    L.r.push_back(r_cur);
    L.r_prime.push_back(*rp);
    L.r_star.push_back(*rs);

    const double level = rho - eps(n + 1, eta);
    const std::size_t k = first_index(index_after(*rp), [&](double v) { return v >= level; });
    if (k == nodes.size()) {
      L.truncated = true;
      L.notice = "growth index does not return to rho - eps_" + std::to_string(n + 1) +
                 " below the grid end";
      break;
    }
    r_cur = crossing([&](double t) { return d(t) >= level; }, std::max(*rp, nodes[k - 1]),
                     nodes[k]);
    ++n;
  }
  if (L.r_next) L.eps.push_back(eps(n, eta));
  return L;
}

Excursion excursion_profile(const GrowthFunction& a, const GridSpec& grid,
                            const SequenceLedger& ledger, std::size_t n) {
  if (n >= ledger.cycles()) throw ParameterError("excursion_profile: cycle index out of range");
  const double lo = n == 0 ? grid.points.front() : ledger.r[n];
  const double hi = ledger.r_star[n];
  std::vector<double> ts{lo};
  for (double t : construction_nodes(a, grid))
    if (t > lo && t < hi) ts.push_back(t);
  ts.push_back(hi);

  double M = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  std::vector<double> q(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    q[i] = log_a_plus(a, ts[i]);
    const double d = q[i] / std::log(ts[i]);
    if (d > M) {
      M = d;
      arg = i;
    }
  }
  const double floor = ledger.lambda + ledger.eta;
  // d(r_n*) <= lambda + eta holds exactly for monotone A; remove rounding excess.
  q.back() = std::min(q.back(), floor * std::log(hi));
  std::vector<double> et(ts.begin() + static_cast<std::ptrdiff_t>(arg), ts.end());
  std::vector<double> eq(q.begin() + static_cast<std::ptrdiff_t>(arg), q.end());
  if (et.size() < 2) throw InfeasibleError("excursion_profile: maximum of d sits at r_n*");
  return {M, ts[arg], Envelope(std::move(et), std::move(eq), floor)};
}

StairResult stair_descent(const Envelope& D, double R, double r_star, double M, double rho) {
  if (!(R < r_star)) throw ParameterError("stair_descent: need R < r_star");
  StairResult out;
  const double slope = -(rho + 1.0);
  double u = R;
  double value = M;
  while (true) {
    const double Du = D(u);
    const double first = std::ceil(u + 1.0);
    const double last = std::floor(r_star);
    auto below = [&](double t) { return D(t) < Du; };
    if (first > last || !below(last)) {
      out.segments.push_back(Segment::constant(u, r_star, value));
      out.end_value = value;
      break;
    }
    // Smallest integer t >= u + 1 with D(t) < D(u).
    double t_next = first;
    if (!below(first)) {
      double lo = first, step = 1.0, hi = last;
      while (lo + step < last && !below(lo + step)) {
        lo += step;
        step *= 2.0;
      }
      if (lo + step < last) hi = lo + step;
      while (hi - lo > 1.0) {
        const double mid = std::floor(0.5 * (lo + hi));
        (below(mid) ? hi : lo) = mid;
      }
      t_next = hi;
    }
    const double u_star = bisect_bracket(below, u, t_next, 1e-12).first;
    out.segments.push_back(Segment::constant(u, t_next, value));

    const double x0 = log_log(t_next);
    auto y = [&](double t) { return value + slope * (log_log(t) - x0); };
    auto g = [&](double t) { return y(t) - D(t); };
    // g is concave in log log t on each node cell, so a sign change inside a
    // cell is detected at its right end.
    std::optional<double> meet;
    double a = t_next;
    while (a < r_star) {
      const double c = std::min(D.next_node(a), r_star);
      if (g(c) >= 0.0) {
        a = c;
        continue;
      }
      double lo = a, hi = c, step = 1.0;
      while (lo + step < hi && g(lo + step) >= 0.0) {
        lo += step;
        step *= 2.0;
      }
      if (lo + step < hi) hi = lo + step;
      meet = bisect_bracket([&](double t) { return g(t) < 0.0; }, lo, hi, 1e-12).first;
      break;
    }
    out.steps.push_back({u, u_star, t_next});
    if (!meet || !(*meet > t_next)) {
      out.segments.push_back(
          Segment::loglog(SegmentKind::loglog_descent, t_next, r_star, t_next, value, slope));
      out.clamped = true;
      out.end_value = y(r_star);
      break;
    }
    out.segments.push_back(
        Segment::loglog(SegmentKind::loglog_descent, t_next, *meet, t_next, value, slope));
    value = y(*meet);
    u = *meet;
  }
  return out;
}

RiseResult connect_rise(double sigma_at_r_star, double m_next, double r_star, double r_prime,
                        double r_next, double lambda, double eta) {
  if (!(r_star < r_prime)) throw ParameterError("connect_rise: need r_star < r_prime");
  if (!(r_next > r_prime)) throw ParameterError("connect_rise: need r_next > r_prime");
  RiseResult out;
  out.C = (m_next - sigma_at_r_star) / std::log((lambda + eta) / (lambda + eta / 2.0));
  out.rise = Segment::loglog(SegmentKind::loglog_rise, r_star, r_prime, r_star, sigma_at_r_star,
                             out.C);
  out.tail = Segment::constant(r_prime, r_next, m_next);
  out.descending = m_next < sigma_at_r_star;
  return out;
}

QpoBuild build_qpo(const GrowthFunction& a, double rho, double lambda, double eta,
                   const GridSpec& grid, const EpsRule& eps, const SmoothingRule& smoothing) {
  SequenceLedger L = find_anchor_sequences(a, rho, lambda, eta, eps, grid);
  const std::size_t N = L.cycles();
  const double t0 = grid.points.front();
  const double T = grid.points.back();

  std::vector<Excursion> ex;
  ex.reserve(N);
  for (std::size_t n = 0; n < N; ++n) {
    ex.push_back(excursion_profile(a, grid, L, n));
    L.M.push_back(ex.back().M);
    L.R.push_back(ex.back().R);
  }

  std::vector<Segment> segs;
  double cursor = t0;
  for (std::size_t n = 0; n < N; ++n) {
    if (ex[n].R > cursor) segs.push_back(Segment::constant(cursor, ex[n].R, ex[n].M));
    StairResult st = stair_descent(ex[n].D, ex[n].R, L.r_star[n], ex[n].M, rho);
    segs.insert(segs.end(), st.segments.begin(), st.segments.end());
    L.stairs.push_back(std::move(st.steps));
    L.stair_clamped.push_back(st.clamped);

    double m_next, r_next;
    if (n + 1 < N) {
      m_next = ex[n + 1].M;
      r_next = L.r[n + 1];
    } else {
      m_next = st.end_value;
      for (double t : construction_nodes(a, grid))
        if (t >= L.r_prime[n]) m_next = std::max(m_next, growth_index(a, t));
      m_next = std::max(m_next, growth_index(a, L.r_prime[n]));
      r_next = T;
      L.tail_level = m_next;
    }
    RiseResult rise = connect_rise(st.end_value, m_next, L.r_star[n], L.r_prime[n],
                                   std::max(r_next, std::nextafter(L.r_prime[n], INFINITY)),
                                   lambda, eta);
    L.C.push_back(rise.C);
    L.descending_connector.push_back(rise.descending);
    segs.push_back(rise.rise);
    if (r_next > L.r_prime[n]) segs.push_back(rise.tail);
    cursor = r_next;
  }

  auto raw = std::make_shared<PiecewiseProximateOrder>(std::move(segs), rho, lambda, eta);
  std::vector<AssociatedMajorant::Piece> pieces;
  for (std::size_t n = 0; n < N; ++n) pieces.push_back({ex[n].R, L.r_star[n], ex[n].D});

  const std::function<double(double)> barrier = [&](double t) {
    const double tc = std::clamp(t, t0, T);
    for (const auto& p : pieces)
      if (tc >= p.a && tc <= p.b) return p.envelope(tc);
    return growth_index(a, tc);
  };
  auto sigma = std::make_shared<const PiecewiseProximateOrder>(
      smooth_corners(*raw, smoothing, &barrier));
  raw.reset();
  auto majorant = std::make_shared<const AssociatedMajorant>(sigma, std::move(pieces));
  return {sigma, majorant, std::move(L)};
}

double derivative_witness_sup(const PiecewiseProximateOrder& sigma,
                              const std::vector<double>& points) {
  double w = 0.0;
  for (double t : points)
    if (t >= sigma.start() && t <= sigma.end()) w = std::max(w, sigma.derivative_witness(t));
  for (const auto& s : sigma.segments())
    w = std::max(w, std::abs(sigma.slope_x(0.5 * (log_log(s.a) + log_log(s.b)))));
  return w;
}

PropertyReport verify_qpo(const PiecewiseProximateOrder& sigma, const AssociatedMajorant& a_star,
                          const GrowthFunction& a, const GridSpec& grid) {
  const auto& pts = grid.points;
  PropertyReport rep;
  const double rho = sigma.rho(), floor = sigma.lambda() + sigma.eta();

  {
    const auto defect = sigma.worst_corner_defect();
    PropertyCheck c{"c1_continuity"};
    c.measured = defect.slope_gap;
    c.bound = 1e-6;
    c.worst_location = defect.t;
    c.status = defect.value_gap <= 1e-9 && defect.slope_gap < 1e-6 ? CheckStatus::pass
                                                                   : CheckStatus::fail;
    std::ostringstream note;
    note << "value gap " << defect.value_gap << ", raw junction gap "
         << sigma.max_junction_gap();
    if (sigma.windows_shrunk()) note << ", blend windows shrunk";
    c.note = note.str();
    rep.checks.push_back(c);
  }
  {
    const std::size_t half = pts.size() / 2;
    double sup = -INFINITY, inf = INFINITY, at_sup = 0, at_inf = 0;
    for (std::size_t i = half; i < pts.size(); ++i) {
      const double s = sigma(pts[i]);
      if (s > sup) sup = s, at_sup = pts[i];
      if (s < inf) inf = s, at_inf = pts[i];
    }
    PropertyCheck c{"tail_levels"};
    const double e_sup = std::abs(sup - rho), e_inf = std::abs(inf - floor);
    c.measured = std::max(e_sup, e_inf);
    c.bound = 0.1;
    c.worst_location = e_sup >= e_inf ? at_sup : at_inf;
    c.windowed = true;
    c.status = c.measured <= c.bound ? CheckStatus::pass : CheckStatus::fail;
    std::ostringstream note;
    note << "tail sup " << sup << " vs rho " << rho << ", tail inf " << inf
         << " vs lambda+eta " << floor;
    c.note = note.str();
    rep.metrics["tail_sup"] = sup;
    rep.metrics["tail_inf"] = inf;
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"derivative_bound"};
    c.measured = derivative_witness_sup(sigma, pts);
    c.bound = 1.1 * sigma.derivative_bound();
    c.status = c.measured <= c.bound ? CheckStatus::pass : CheckStatus::fail;
    c.note = "sup |sigma'(t)| t log t against 1.1 max{sup C_n, rho + 1}";
    rep.checks.push_back(c);
  }
  std::vector<double> log_star(pts.size()), log_pow(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    log_star[i] = a_star.log_value(pts[i]);
    log_pow[i] = sigma(pts[i]) * std::log(pts[i]);
  }
  {
    PropertyCheck c{"majorant_monotone"};
    double worst = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double drop = log_star[i - 1] - log_star[i];
      const double tol = 1e-12 * std::max(1.0, std::abs(log_star[i - 1]));
      if (drop - tol > worst) {
        worst = drop - tol;
        c.worst_location = pts[i];
      }
    }
    c.measured = worst;
    c.bound = 0.0;
    c.status = worst <= 0.0 ? CheckStatus::pass : CheckStatus::fail;
    c.note = "largest decrease of log A* between consecutive grid points beyond 1e-12 relative";
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"sandwich"};
    bool ok = true;
    double worst_ratio = 0.0;
    nlohmann::json per = nlohmann::json::array();
    std::vector<double> slack(a_star.pieces().size(), 0.0);
    double below = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double over = log_star[i] - log_pow[i];
      const double tol = 1e-12 * std::max(1.0, std::abs(log_pow[i]));
      if (over > tol) {
        ok = false;
        if (over > below) below = over, c.worst_location = pts[i];
      }
      const int k = a_star.piece_index(pts[i]);
      if (k >= 0)
        slack[static_cast<std::size_t>(k)] =
            std::max(slack[static_cast<std::size_t>(k)], std::expm1(-over));
    }
    for (std::size_t k = 0; k < slack.size(); ++k) {
      const auto& p = a_star.pieces()[k];
      const double bound = std::pow(9.0, rho + 1.0) / p.a;
      per.push_back({{"R", p.a}, {"r_star", p.b}, {"slack", slack[k]}, {"bound", bound}});
      if (slack[k] > bound) ok = false;
      if (slack[k] / bound > worst_ratio) {
        worst_ratio = slack[k] / bound;
        if (below == 0.0) c.worst_location = p.a;
      }
    }
    c.measured = worst_ratio;
    c.bound = 1.0;
    c.status = ok ? CheckStatus::pass : CheckStatus::fail;
    c.note = "A* <= t^sigma on the grid; measured is max slack / (9^{rho+1}/R_n)";
    rep.metrics["sandwich"] = per;
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"majorization"};
    double worst = -INFINITY;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double diff = a.log_value(pts[i]) - log_pow[i];
      const double tol = 1e-12 * std::max(1.0, std::abs(log_pow[i]));
      if (diff - tol > worst) {
        worst = diff - tol;
        c.worst_location = pts[i];
      }
    }
    c.measured = worst;
    c.bound = 0.0;
    c.status = worst <= 0.0 ? CheckStatus::pass : CheckStatus::fail;
    c.note = "max of log A - sigma log t beyond 1e-12 relative";
    rep.checks.push_back(c);
  }
  double doubling = -INFINITY;
  for (std::size_t i = 0; i < pts.size() && 2.0 * pts[i] <= pts.back(); ++i)
    doubling = std::max(doubling, a_star.log_value(2.0 * pts[i]) - log_star[i]);
  rep.metrics["doubling_ratio_sup"] = std::isfinite(doubling) ? std::exp(doubling) : 0.0;
  return rep;
}

std::vector<EtaSweepRow> eta_necessity_sweep(double lambda, double rho,
                                             const std::vector<double>& etas, double t_max,
                                             double per_decade, double ramp_fraction) {
  if (etas.empty()) throw ParameterError("eta sweep: empty eta list");
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (!(etas[i] > 0.0 && etas[i] < rho - lambda))
      throw ParameterError("eta sweep: every eta must lie in (0, rho - lambda)");
    if (i > 0 && !(etas[i] < etas[i - 1]))
      throw ParameterError("eta sweep: eta list must be strictly decreasing");
  }
  const GrowthFunction A = build_counterexample(lambda, rho, ramp_fraction, t_max);
  const GridSpec grid = GridSpec::log_uniform(std::numbers::e, t_max, per_decade);
  std::vector<EtaSweepRow> rows;
  for (double eta : etas) {
    const QpoBuild b = build_qpo(A, rho, lambda, eta, grid);
    rows.push_back({eta, derivative_witness_sup(*b.sigma, grid.points),
                    (rho - lambda - eta) / std::log((lambda + eta) / lambda)});
  }
  return rows;
}

CsvTable qpo_table(const PiecewiseProximateOrder& sigma, const AssociatedMajorant& a_star,
                   const GrowthFunction& a, const GridSpec& grid) {
  CsvTable tab{{"t", "sigma", "t_pow_sigma", "A", "A_star", "deriv_witness"}, {}};
  tab.rows.reserve(grid.points.size());
  for (double t : grid.points) {
    const double s = sigma(t);
    tab.rows.push_back({t, s, std::exp(s * std::log(t)), a(t), a_star(t),
                        sigma.derivative_witness(t)});
  }
  return tab;
}

void write_qpo_csv(const std::string& path, const PiecewiseProximateOrder& sigma,
                   const AssociatedMajorant& a_star, const GrowthFunction& a,
                   const GridSpec& grid) {
  write_csv(path, qpo_table(sigma, a_star, a, grid));
}

}  // namespace qpo
