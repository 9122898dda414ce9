#include "qpo/harness.hpp"

#include "qpo/construction.hpp"
#include "qpo/disc.hpp"
#include "qpo/errors.hpp"
#include "qpo/growth.hpp"
#include "qpo/numerics.hpp"
#include "qpo/strip.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace qpo {

namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct IdName {
  ExperimentId id;
  const char* name;
};

constexpr IdName kIds[] = {
    {ExperimentId::thm1, "thm1"},       {ExperimentId::eta_necessity, "eta-necessity"},
    {ExperimentId::linden, "linden"},   {ExperimentId::thm2, "thm2"},
    {ExperimentId::prop2, "prop2"},     {ExperimentId::prop3, "prop3"},
    {ExperimentId::thm3, "thm3"},       {ExperimentId::warschawski, "warschawski"},
};

std::string num(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> to_vector(const Eigen::ArrayXd& a) { return {a.data(), a.data() + a.size()}; }

PropertyCheck bound_check(std::string name, double measured, double bound, bool ok,
                          std::string note, bool windowed = false) {
  PropertyCheck c(std::move(name));
  c.measured = measured;
  c.bound = bound;
  c.status = ok ? CheckStatus::pass : CheckStatus::fail;
  c.note = std::move(note);
  c.windowed = windowed;
  return c;
}

std::string p_label(double p) {
  std::ostringstream s;
  s << p;
  return s.str();
}

double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

// Least-squares slope of y against log 1/(1-r) over radii in the last
// `decades` decades of 1 - r.
double tail_slope(const std::vector<double>& radii, const std::vector<double>& y, double decades) {
  const double last_gap = 1.0 - radii.back();
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (1.0 - radii[i] > last_gap * std::pow(10.0, decades) * (1.0 + 1e-9)) continue;
    xs.push_back(std::log(1.0 / (1.0 - radii[i])));
    ys.push_back(y[i]);
  }
  if (xs.size() < 2) throw NumericError("tail slope: fewer than two radii in the window");
  return least_squares_slope(xs, ys);
}

// ---- drivers -------------------------------------------------------------------

DriverOutput drive_thm1(const ExperimentConfig& c) {
  DriverOutput out;
  const auto a = build_counterexample(c.lambda, c.rho, c.ramp, c.t_max);
  const auto grid = GridSpec::log_uniform(std::numbers::e, c.t_max, c.per_decade);
  const auto b = build_qpo(a, c.rho, c.lambda, c.eta, grid, EpsRule{c.eps1, 0.5});
  out.report = verify_qpo(*b.sigma, *b.majorant, a, grid);

  const auto& L = b.ledger;
  CsvTable anchors{{"n", "r", "r_prime", "r_star", "M", "R", "C", "eps", "stairs",
                    "sigma_at_r_star", "anchor_bound"},
                   {}};
  double worst_excess = -kInf;
  for (std::size_t n = 0; n < L.cycles(); ++n) {
    const double R = L.R[n];
    const double bound = c.lambda + c.eta + std::pow(9.0, c.rho + 1.0) / (R * std::log(R));
    const double s = (*b.sigma)(L.r_star[n]);
    worst_excess = std::max(worst_excess, s - bound);
    anchors.rows.push_back({double(n + 1), L.r[n], L.r_prime[n], L.r_star[n], L.M[n], R, L.C[n],
                            L.eps[n], double(L.stairs[n].size()), s, bound});
  }
  out.report.metrics["anchor_level_excess"] = worst_excess;
  out.report.metrics["segments"] = b.sigma->segments().size();
  out.extra["ledger"] = L.to_json(false);
  out.tables.emplace_back("qpo.csv", qpo_table(*b.sigma, *b.majorant, a, grid));
  out.tables.emplace_back("anchors.csv", std::move(anchors));
  return out;
}

DriverOutput drive_eta(const ExperimentConfig& c) {
  DriverOutput out;
  const auto rows = eta_necessity_sweep(c.lambda, c.rho, c.etas, c.t_max, c.per_decade, c.ramp);
  CsvTable tab{{"eta", "witness", "lower_bound", "ratio"}, {}};
  double worst = kInf;
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double ratio = rows[i].witness / rows[i].lower_bound;
    worst = std::min(worst, ratio);
    if (i > 0 && !(rows[i].witness > rows[i - 1].witness)) monotone = false;
    tab.rows.push_back({rows[i].eta, rows[i].witness, rows[i].lower_bound, ratio});
  }
  out.report.checks.push_back(bound_check("witness_vs_lower_bound", worst, 0.9, worst >= 0.9,
                                          "min of witness / lower bound over the etas"));
  out.report.checks.push_back(bound_check("monotone_in_eta", monotone ? 1.0 : 0.0, 1.0, monotone,
                                          "witness increases as eta decreases"));
  out.tables.emplace_back("eta.csv", std::move(tab));
  return out;
}

struct CircleRow {
  double log_m = 0.0;
  std::vector<double> means;
  double n1 = kNaN;
};

CsvTable circle_table(const std::vector<double>& radii, const std::vector<CircleRow>& rows,
                      const std::vector<double>& p_list) {
  CsvTable tab{{"r", "log_M"}, {}};
  for (double p : p_list) tab.header.push_back("m_" + p_label(p));
  tab.header.push_back("n1");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    std::vector<double> row{radii[i], rows[i].log_m};
    row.insert(row.end(), rows[i].means.begin(), rows[i].means.end());
    row.push_back(rows[i].n1);
    tab.rows.push_back(std::move(row));
  }
  return tab;
}

std::vector<CircleRow> sweep_circles(const AnalyticFunctionModel& f, const DiscGrid& grid,
                                     const std::vector<double>& p_list, const ZeroSequence* zeros) {
  std::vector<CircleRow> rows(grid.radii.size());
  for (std::size_t i = 0; i < grid.radii.size(); ++i) {
    const double r = grid.radii[i];
    rows[i].log_m = log_max_modulus(f, r, grid.n_theta);
    if (!p_list.empty())
      for (const auto& m : integral_means(f, r, p_list, grid.n_theta)) rows[i].means.push_back(m.value);
    if (zeros) {
      rows[i].n1 = 0.5 * (1.0 + r) <= zeros->complete_below() ? zero_count_polar(*zeros, r) : kNaN;
    } else {
      rows[i].n1 = 0.0;
    }
  }
  return rows;
}

DriverOutput drive_linden(const ExperimentConfig& c) {
  DriverOutput out;
  const auto f = AnalyticFunctionModel::closed_form(ClosedForm::exp_pole, {1.0, 2.0}, c.r_max);
  const auto grid = DiscGrid::log_gaps(0.1, 1.0 - c.r_max, c.radii_per_decade);
  const auto rows = sweep_circles(f, grid, c.p_list, nullptr);

  std::vector<double> yM;
  for (const auto& r : rows) yM.push_back(log_plus(std::max(r.log_m, 0.0)));
  const auto M = orders_from_samples(grid.radii, yM, OrderEstimator::slope);
  out.report.metrics["sigma_M"] = M.upper;
  out.report.metrics["lambda_M"] = M.lower;
  double prev = -kInf;
  bool monotone = true;
  for (std::size_t k = 0; k < c.p_list.size(); ++k) {
    const double p = c.p_list[k];
    std::vector<double> y;
    for (const auto& r : rows) y.push_back(log_plus(r.means[k]));
    const auto e = orders_from_samples(grid.radii, y, OrderEstimator::slope);
    const std::string lab = p_label(p);
    out.report.metrics["rho_" + lab] = e.upper;
    out.report.metrics["lambda_" + lab] = e.lower;
    out.report.checks.push_back(bound_check("linden_lower_p" + lab, e.upper, M.upper + 0.05,
                                            e.upper <= M.upper + 0.05,
                                            "rho_p <= sigma_M + 0.05", true));
    out.report.checks.push_back(bound_check("linden_upper_p" + lab, M.upper, e.upper + 1.0 / p + 0.1,
                                            M.upper <= e.upper + 1.0 / p + 0.1,
                                            "sigma_M <= rho_p + 1/p + 0.1", true));
    out.report.checks.push_back(bound_check("lower_order_p" + lab, M.lower, e.lower + 1.0 / p + 0.1,
                                            M.lower <= e.lower + 1.0 / p + 0.1,
                                            "lambda_M <= lambda_p + 1/p + 0.1", true));
    if (!(e.upper >= prev)) monotone = false;
    prev = e.upper;
  }
  out.report.checks.push_back(bound_check("monotone_in_p", monotone ? 1.0 : 0.0, 1.0, monotone,
                                          "rho_p non-decreasing along the p list", true));
  out.tables.emplace_back("linden.csv", circle_table(grid.radii, rows, c.p_list));
  return out;
}

struct GapExperiment {
  GapSeriesBuild build;
  DiscGrid grid;
};

GapExperiment gap_experiment(const ExperimentConfig& c) {
  // The counterexample's domain is padded so that t = 1/(1-r) rounding stays inside.
  const auto a = build_counterexample(c.lambda, c.rho, c.ramp, c.t_max * 1.01);
  auto grid = DiscGrid::log_gaps(0.3, 1.0 / c.t_max, c.radii_per_decade);
  auto profile = [&a](double r) { return a(1.0 / (1.0 - r)); };
  return {gap_series_from_profile(profile, grid.radii), std::move(grid)};
}

void gap_metrics(DriverOutput& out, const GapExperiment& g) {
  const auto est = disc_orders(g.build.model, g.grid, OrderEstimator::ratio);
  out.report.metrics["sigma_M"] = est.upper;
  out.report.metrics["lambda_M"] = est.lower;
  out.report.metrics["terms"] = g.build.model.exponents().size();
  out.report.metrics["dropped_radii"] = g.build.dropped_radii.size();
  out.extra["series"] = g.build.model.to_json();
}

DriverOutput drive_thm2(const ExperimentConfig& c) {
  DriverOutput out;
  const auto g = gap_experiment(c);
  gap_metrics(out, g);
  const auto rows = sweep_circles(g.build.model, g.grid, c.p_list, nullptr);
  const double bound = 1.0 + c.eps + 0.15;
  for (std::size_t k = 0; k < c.p_list.size(); ++k) {
    std::vector<double> y;
    for (const auto& r : rows) y.push_back(std::log(r.means[k]));
    const double s = tail_slope(g.grid.radii, y, 2.0);
    out.report.checks.push_back(bound_check("mp_slope_p" + p_label(c.p_list[k]), s, bound,
                                            s <= bound,
                                            "slope of log m_p over the last two decades", true));
  }
  auto tab = circle_table(g.grid.radii, rows, c.p_list);
  tab.header.pop_back();
  for (auto& row : tab.rows) row.pop_back();
  out.tables.emplace_back("thm2.csv", std::move(tab));
  return out;
}

DriverOutput drive_prop2(const ExperimentConfig& c) {
  DriverOutput out;
  const auto g = gap_experiment(c);
  gap_metrics(out, g);
  const auto zeros = gap_series_zeros(g.build.model, g.build.model.r_max());
  out.report.metrics["zeros"] = zeros.size();
  out.report.metrics["complete_below"] = zeros.complete_below();
  CsvTable tab{{"r", "n1"}, {}};
  std::vector<double> xs, ys;
  for (double r : g.grid.radii) {
    const bool complete = 0.5 * (1.0 + r) <= zeros.complete_below();
    const double n1 = complete ? zero_count_polar(zeros, r) : kNaN;
    tab.rows.push_back({r, n1});
    if (complete && n1 >= 1.0) {
      xs.push_back(std::log(1.0 / (1.0 - r)));
      ys.push_back(std::log(n1));
    }
  }
  const double bound = 1.0 + c.eps + 0.15;
  if (xs.size() < 2) {
    out.report.checks.push_back(bound_check("n1_slope", kNaN, bound, false,
                                            "fewer than two radii with zeros in the window"));
  } else {
    const double s = least_squares_slope(xs, ys);
    out.report.checks.push_back(bound_check("n1_slope", s, bound, s <= bound,
                                            "slope of log n1 over radii with n1 >= 1", true));
  }
  out.tables.emplace_back("prop2.csv", std::move(tab));
  CsvTable z{{"re", "im"}, {}};
  for (const auto& p : zeros.points()) z.rows.push_back({p.real(), p.imag()});
  out.tables.emplace_back("zeros.csv", std::move(z));
  return out;
}

DriverOutput drive_prop3(const ExperimentConfig& c) {
  DriverOutput out;
  const auto l = ProximateOrderFunction::oscillating(c.l_mean, c.l_amplitude, c.t_max);
  const auto radii = to_vector(log_uniform_points(10.0, c.t_max, 10));
  const double a = c.a;
  auto g = [a](std::complex<double> w) { return -std::pow(w, a).real(); };
  CsvTable samples;
  out.report = cartwright_witness(g, l, c.q, 0.0, radii, c.eps, 64, &samples);
  const double a_bad = l.l2() + 1.0;
  auto bad = [a_bad](std::complex<double> w) { return -std::pow(w, a_bad).real(); };
  const auto control = cartwright_witness(bad, l, c.q, 0.0, radii, c.eps, 64);
  const bool flagged = control.at("hypothesis").status == CheckStatus::hypothesis_unmet;
  out.report.checks.push_back(bound_check("negative_control", flagged ? 1.0 : 0.0, 1.0, flagged,
                                          "exp(-w^{l2+1}) must be reported as hypothesis unmet"));
  out.report.metrics["l1"] = l.l1();
  out.report.metrics["l2"] = l.l2();
  out.tables.emplace_back("sector.csv", std::move(samples));
  return out;
}

DriverOutput drive_thm3(const ExperimentConfig& c) {
  DriverOutput out;
  const auto grid = DiscGrid::log_gaps(0.5, 1.0 - c.r_max, c.radii_per_decade);
  const auto f =
      AnalyticFunctionModel::closed_form(ClosedForm::pole_power, {c.lambda, 1.0, -1.0}, c.r_max);
  const double lam = c.lambda;
  out.report = real_part_witness(f, [lam](double) { return lam; }, c.eps, grid.radii);
  const auto g = AnalyticFunctionModel::closed_form(ClosedForm::pole_power, {0.5, -1.0, 1.0}, c.r_max);
  const auto control = real_part_witness(g, [](double) { return 0.5; }, c.eps, grid.radii);
  const bool flagged = control.at("real_part_bound").status == CheckStatus::hypothesis_out_of_range;
  out.report.checks.push_back(bound_check("out_of_range_control", flagged ? 1.0 : 0.0, 1.0, flagged,
                                          "lambda = 1/2 must be reported out of range"));
  CsvTable tab{{"r", "max_re", "max_abs_re", "bound"}, {}};
  for (const auto& row : out.report.metrics["radii"])
    tab.rows.push_back({row["r"].get<double>(), row["max_re"].get<double>(),
                        row["max_abs_re"].get<double>(), row["bound"].get<double>()});
  out.tables.emplace_back("real_part.csv", std::move(tab));
  return out;
}

DriverOutput drive_warschawski(const ExperimentConfig& c) {
  DriverOutput out;
  const double u_end = std::log(c.t_max);

  // Straight strip: l = 2, q = 1/2 gives omega = pi/2 and the identity map.
  const auto straight =
      omega_from_l(std::make_shared<ProximateOrderFunction>(ProximateOrderFunction::constant(2.0, c.t_max)), 0.5);
  double id_err = 0.0;
  for (int i = 0; i <= 50; ++i) {
    const double u = u_end * i / 50.0;
    for (int j = -4; j <= 4; ++j) {
      const double v = straight.omega(u) * j / 4.0;
      id_err = std::max(id_err, std::abs(warschawski_map(straight, u, v) - std::complex<double>(u, v)));
    }
  }
  out.report.checks.push_back(bound_check("straight_strip_identity", id_err, 1e-10, id_err <= 1e-10,
                                          "max |map(u, v) - (u + iv)| for omega = pi/2"));

  auto l = std::make_shared<ProximateOrderFunction>(
      ProximateOrderFunction::oscillating(c.l_mean, c.l_amplitude, c.t_max));
  auto prof = omega_from_l(l, c.q);
  {
    PropertyCheck ic("integrability");
    ic.status = prof.integrable ? CheckStatus::pass : CheckStatus::fail;
    ic.measured = prof.partial_integrals.empty() ? 0.0 : prof.partial_integrals.back();
    ic.bound = kInf;
    ic.windowed = true;
    ic.note = "partial integrals of (omega')^2/omega settle over the decades";
    out.report.checks.push_back(ic);
  }
  prof.k = fit_warschawski_constant(prof, c.t_max);
  out.report.metrics["k"] = prof.k;

  double worst = 0.0, at = 0.0;
  for (double r : to_vector(log_uniform_points(c.t_max / 10.0, c.t_max, 20))) {
    const double d = std::abs(mean_proximate_order_L(*l, r) - (*l)(r));
    if (d > worst) {
      worst = d;
      at = r;
    }
  }
  auto lc = bound_check("L_minus_l", worst, 0.05, worst < 0.05,
                        "max |L(r) - l(r)| over the final decade", true);
  lc.worst_location = at;
  out.report.checks.push_back(lc);

  CsvTable tab{{"r", "l", "L", "abs_diff", "log_lhs", "log_rhs"}, {}};
  double drift = 0.0, prev_ratio = kNaN;
  for (double r : to_vector(log_uniform_points(10.0, c.t_max, 10))) {
    const double lv = (*l)(r), Lv = mean_proximate_order_L(*l, r);
    const auto m = sector_modulus_relation(prof, 1.0, r, 0.0);
    const double ratio = m.log_lhs - m.log_rhs;
    if (std::isfinite(prev_ratio)) drift = std::max(drift, std::abs(ratio - prev_ratio));
    prev_ratio = ratio;
    tab.rows.push_back({r, lv, Lv, std::abs(Lv - lv), m.log_lhs, m.log_rhs});
  }
  // Rows are a tenth of a decade apart; scale the step drift to a decade.
  const double per_decade = 10.0 * drift;
  out.report.checks.push_back(bound_check("modulus_ratio_drift", per_decade, std::log(1.02),
                                          per_decade < std::log(1.02),
                                          "log(lhs/rhs) change per decade", true));
  double lo = kInf, hi = -kInf;
  const double w = prof.omega(u_end);
  for (int j = -8; j <= 8; ++j) {
    const auto m = sector_modulus_relation(prof, 1.0, c.t_max, w * j / 8.0);
    lo = std::min(lo, m.log_lhs);
    hi = std::max(hi, m.log_lhs);
  }
  const double spread = std::expm1(hi - lo);
  out.report.checks.push_back(bound_check("theta_invariance", spread, 0.01, spread < 0.01,
                                          "relative spread of lhs over theta at the largest radius"));
  out.tables.emplace_back("strip.csv", std::move(tab));
  return out;
}

}  // namespace

std::string to_string(ExperimentId id) {
  for (const auto& e : kIds)
    if (e.id == id) return e.name;
  return "unknown";
}

ExperimentId experiment_from_string(const std::string& s) {
  for (const auto& e : kIds)
    if (s == e.name) return e.id;
  throw ConfigError({"experiment: unknown id '" + s + "'"});
}

ExperimentConfig ExperimentConfig::defaults_for(ExperimentId id) {
  ExperimentConfig c;
  c.id = id;
  switch (id) {
    case ExperimentId::thm1:
    case ExperimentId::eta_necessity:
      break;
    case ExperimentId::linden:
      c.r_max = 1.0 - 1e-3;
      c.radii_per_decade = 20.0;
      break;
    case ExperimentId::thm2:
    case ExperimentId::prop2:
      c.lambda = 0.3;
      c.rho = 0.8;
      c.eps = 0.1;
      c.p_list = {1.0, 2.0};
      c.t_max = 1e12;
      c.radii_per_decade = 10.0;
      break;
    case ExperimentId::prop3:
      c.l_mean = 1.7;
      c.l_amplitude = 0.3;
      c.q = 0.9;
      c.eps = 0.2;
      c.a = 1.0;
      c.t_max = 1e12;
      break;
    case ExperimentId::thm3:
      c.lambda = 1.5;
      c.eps = 0.2;
      c.r_max = 1.0 - 1e-6;
      c.radii_per_decade = 5.0;
      break;
    case ExperimentId::warschawski:
      c.l_mean = 1.5;
      c.l_amplitude = 0.5;
      c.q = 0.9;
      c.t_max = 1e12;
      break;
  }
  c.eps1 = std::min(1.0, c.eta) / 2.0;
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"experiment", to_string(id)},
          {"lambda", lambda},
          {"rho", rho},
          {"eta", eta},
          {"eps1", eps1},
          {"eps", eps},
          {"etas", etas},
          {"p", p_list},
          {"ramp", ramp},
          {"per_decade", per_decade},
          {"radii_per_decade", radii_per_decade},
          {"t_max", t_max},
          {"r_max", r_max},
          {"q", q},
          {"l_mean", l_mean},
          {"l_amplitude", l_amplitude},
          {"a", a},
          {"seed", seed},
          {"output_dir", output_dir}};
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> e;
  auto need = [&e](bool ok, const std::string& field, const std::string& what, double got) {
    if (!ok) e.push_back(field + ": " + what + " (got " + num(got) + ")");
  };
  auto strictly = [&e](const std::vector<double>& v, const std::string& field, bool increasing) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (increasing ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1]))
        e.push_back(field + "[" + std::to_string(i) + "]: list must be strictly " +
                    (increasing ? "increasing" : "decreasing"));
  };
  switch (c.id) {
    case ExperimentId::thm1:
    case ExperimentId::eta_necessity:
      need(c.lambda > 0.0, "lambda", "must be positive", c.lambda);
      need(c.rho > c.lambda, "rho", "must exceed lambda", c.rho);
      need(c.ramp > 0.0 && c.ramp < 1.0, "ramp", "must lie in (0, 1)", c.ramp);
      need(c.t_max >= 100.0, "t_max", "must be at least 100", c.t_max);
      need(c.per_decade >= 10.0, "per_decade", "must be at least 10", c.per_decade);
      if (c.id == ExperimentId::thm1) {
        need(c.eta > 0.0 && c.eta < c.rho - c.lambda, "eta", "must satisfy 0 < eta < rho - lambda",
             c.eta);
        need(c.eps1 > 0.0 && c.eps1 < std::min(1.0, c.eta), "eps1",
             "must satisfy 0 < eps1 < min{1, eta}", c.eps1);
      } else {
        if (c.etas.empty()) e.push_back("etas: must not be empty");
        for (std::size_t i = 0; i < c.etas.size(); ++i)
          need(c.etas[i] > 0.0 && c.etas[i] < c.rho - c.lambda, "etas[" + std::to_string(i) + "]",
               "must satisfy 0 < eta < rho - lambda", c.etas[i]);
        strictly(c.etas, "etas", false);
      }
      break;
    case ExperimentId::linden:
    case ExperimentId::thm2:
    case ExperimentId::prop2:
      if (c.p_list.empty()) e.push_back("p: must not be empty");
      for (std::size_t i = 0; i < c.p_list.size(); ++i)
        need(c.p_list[i] >= 1.0, "p[" + std::to_string(i) + "]", "must be at least 1", c.p_list[i]);
      strictly(c.p_list, "p", true);
      need(c.radii_per_decade > 0.0, "radii_per_decade", "must be positive", c.radii_per_decade);
      if (c.id == ExperimentId::linden) {
        need(c.r_max > 0.9 && c.r_max < 1.0, "r_max", "must lie in (0.9, 1)", c.r_max);
      } else {
        need(c.lambda > 0.0, "lambda", "must be positive", c.lambda);
        need(c.rho > c.lambda && c.rho <= 1.0, "rho", "must satisfy lambda < rho <= 1", c.rho);
        need(c.eps > 0.0, "eps", "must be positive", c.eps);
        need(c.ramp > 0.0 && c.ramp < 1.0, "ramp", "must lie in (0, 1)", c.ramp);
        need(c.t_max >= 1e3 && c.t_max <= 1e13, "t_max", "must lie in [1e3, 1e13]", c.t_max);
      }
      break;
    case ExperimentId::prop3:
    case ExperimentId::warschawski:
      need(c.l_amplitude >= 0.0, "l_amplitude", "must be non-negative", c.l_amplitude);
      need(c.l_mean - c.l_amplitude > 0.0, "l_mean", "must exceed l_amplitude", c.l_mean);
      need(c.q > 0.0 && c.q < 1.0, "q", "must lie in (0, 1)", c.q);
      need(c.t_max >= 100.0, "t_max", "must be at least 100", c.t_max);
      if (c.id == ExperimentId::prop3) {
        need(c.eps > 0.0, "eps", "must be positive", c.eps);
        need(c.a > 0.0, "a", "must be positive", c.a);
      }
      break;
    case ExperimentId::thm3:
      need(c.lambda > 0.0, "lambda", "must be positive", c.lambda);
      need(c.eps > 0.0, "eps", "must be positive", c.eps);
      need(c.r_max > 0.9 && c.r_max < 1.0, "r_max", "must lie in (0.9, 1)", c.r_max);
      need(c.radii_per_decade > 0.0, "radii_per_decade", "must be positive", c.radii_per_decade);
      break;
  }
  return e;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError({"$: configuration must be a JSON object"});
  if (!j.contains("experiment") || !j["experiment"].is_string())
    throw ConfigError({"experiment: required string field is missing"});
  ExperimentConfig c = ExperimentConfig::defaults_for(experiment_from_string(j["experiment"]));
  std::vector<std::string> errors;

  auto number = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number())
      errors.push_back(std::string(key) + ": expected a number");
    else
      dst = j[key].get<double>();
  };
  auto numbers = [&](const char* key, std::vector<double>& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_array()) {
      errors.push_back(std::string(key) + ": expected an array of numbers");
      return;
    }
    std::vector<double> v;
    for (std::size_t i = 0; i < j[key].size(); ++i) {
      if (!j[key][i].is_number())
        errors.push_back(std::string(key) + "[" + std::to_string(i) + "]: expected a number");
      else
        v.push_back(j[key][i].get<double>());
    }
    dst = std::move(v);
  };

  static const char* known[] = {"experiment", "lambda", "rho", "eta", "eps1", "eps", "etas", "p",
                                "ramp", "per_decade", "radii_per_decade", "t_max", "r_max", "q",
                                "l_mean", "l_amplitude", "a", "seed", "output_dir"};
  for (const auto& [key, value] : j.items())
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }) == std::end(known))
      errors.push_back(key + ": unknown field");

  number("lambda", c.lambda);
  number("rho", c.rho);
  number("eta", c.eta);
  number("eps", c.eps);
  numbers("etas", c.etas);
  numbers("p", c.p_list);
  number("ramp", c.ramp);
  number("per_decade", c.per_decade);
  number("radii_per_decade", c.radii_per_decade);
  number("t_max", c.t_max);
  number("r_max", c.r_max);
  number("q", c.q);
  number("l_mean", c.l_mean);
  number("l_amplitude", c.l_amplitude);
  number("a", c.a);
  c.eps1 = std::min(1.0, c.eta) / 2.0;
  number("eps1", c.eps1);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned())
      errors.push_back("seed: expected a non-negative integer");
    else
      c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string())
      errors.push_back("output_dir: expected a string");
    else
      c.output_dir = j["output_dir"].get<std::string>();
  }
  if (errors.empty()) {
    auto more = validate(c);
    errors.insert(errors.end(), more.begin(), more.end());
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"$: cannot open " + path});
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({std::string("$: malformed JSON: ") + e.what()});
  }
  return config_from_json(j);
}

DriverOutput run_driver(const ExperimentConfig& c) {
  if (auto problems = validate(c); !problems.empty()) throw ConfigError(std::move(problems));
  switch (c.id) {
    case ExperimentId::thm1: return drive_thm1(c);
    case ExperimentId::eta_necessity: return drive_eta(c);
    case ExperimentId::linden: return drive_linden(c);
    case ExperimentId::thm2: return drive_thm2(c);
    case ExperimentId::prop2: return drive_prop2(c);
    case ExperimentId::prop3: return drive_prop3(c);
    case ExperimentId::thm3: return drive_thm3(c);
    case ExperimentId::warschawski: return drive_warschawski(c);
  }
  throw ConfigError({"experiment: unhandled id"});
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json files_j = nlohmann::json::array();
  for (const auto& [name, bytes] : files) files_j.push_back({{"name", name}, {"bytes", bytes}});
  nlohmann::json j{{"config", config},
                   {"code_version", code_version},
                   {"started", started},
                   {"finished", finished},
                   {"status", complete ? "complete" : "incomplete"},
                   {"workers", 1},
                   {"report", report.to_json()},
                   {"files", files_j}};
  if (config.contains("seed")) j["seed"] = config["seed"];
  if (!extra.is_null() && !extra.empty()) j["extra"] = extra;
  if (!error.empty()) j["error"] = error;
  return j;
}

int RunManifest::exit_code() const {
  if (!complete) return 4;
  return report.all_passed() ? 0 : 2;
}

void export_csv(const CsvTable& table, const std::string& path) { write_csv(path, table); }

RunManifest run_experiment(const ExperimentConfig& c) {
  RunManifest m;
  m.config = c.to_json();
  m.code_version = kCodeVersion;
  m.started = iso_now();
  const fs::path dir(c.output_dir);
  fs::create_directories(dir);
  try {
    auto out = run_driver(c);
    m.report = std::move(out.report);
    m.extra = std::move(out.extra);
    for (const auto& [name, table] : out.tables) {
      const auto path = dir / name;
      export_csv(table, path.string());
      m.files.emplace_back(name, fs::file_size(path));
    }
    m.complete = true;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    m.error = e.what();
  }
  m.finished = iso_now();
  const auto tmp = dir / "manifest.json.tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << m.to_json().dump(2) << '\n';
  }
  fs::rename(tmp, dir / "manifest.json");
  return m;
}

}  // namespace qpo
