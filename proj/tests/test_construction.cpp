#include "qpo/construction.hpp"
#include "qpo/errors.hpp"
#include "qpo/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qpo;
using doctest::Approx;

namespace {

constexpr double kE = std::numbers::e;

struct CounterexampleRun {
  GrowthFunction a = build_counterexample(1.0, 2.0, 0.01, 1e8);
  GridSpec grid = GridSpec::log_uniform(kE, 1e8, 200.0);
  QpoBuild build = build_qpo(a, 2.0, 1.0, 0.5, grid);
};

const CounterexampleRun& run() {
  static const CounterexampleRun r;
  return r;
}

}  // namespace

TEST_SUITE("construction") {
  TEST_CASE("segments must tile") {
    std::vector<Segment> gap{Segment::constant(3.0, 10.0, 1.0), Segment::constant(11.0, 20.0, 1.0)};
    CHECK_THROWS_AS(PiecewiseProximateOrder(gap, 2.0, 1.0, 0.5), ParameterError);
    CHECK_THROWS_AS(PiecewiseProximateOrder({}, 2.0, 1.0, 0.5), ParameterError);
  }

  TEST_CASE("smoothing a single constant segment leaves it unchanged") {
    PiecewiseProximateOrder s({Segment::constant(3.0, 1e6, 1.7)}, 2.0, 1.0, 0.5);
    const auto sm = smooth_corners(s);
    for (double t : {3.0, 17.0, 1e3, 1e6}) CHECK(sm(t) == s(t));
    CHECK(sm.blends().empty());
  }

  TEST_CASE("smoothing is C1 and keeps the slope between the adjoining slopes") {
    const double x0 = log_log(100.0);
    std::vector<Segment> segs{
        Segment::constant(3.0, 100.0, 1.5),
        Segment::loglog(SegmentKind::loglog_rise, 100.0, 1e4, 100.0, 1.5, 0.8),
        Segment::constant(1e4, 1e8, 1.5 + 0.8 * (log_log(1e4) - x0)),
    };
    PiecewiseProximateOrder raw(segs, 2.0, 1.0, 0.5);
    const auto sm = smooth_corners(raw);
    CHECK(sm.worst_corner_defect().value_gap <= 1e-9);
    CHECK(sm.worst_corner_defect().slope_gap < 1e-6);
    for (double x = log_log(3.0); x < log_log(1e8); x += 0.001) {
      CHECK(sm.slope_x(x) >= -1e-12);
      CHECK(sm.slope_x(x) <= 0.8 + 1e-12);
    }
  }

  TEST_CASE("envelope is non-increasing and matches a brute-force suffix sup") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::vector<double> t, q;
    for (int i = 0; i < 60; ++i) {
      t.push_back(std::exp(2.0 + 0.2 * i));
      q.push_back(u(rng) * std::log(t.back()));
    }
    const Envelope D(t, q, 1.2);
    std::uniform_real_distribution<double> pick(std::log(t.front()), std::log(t.back()));
    for (int i = 0; i < 200; ++i) {
      double t1 = std::exp(pick(rng)), t2 = std::exp(pick(rng));
      if (t1 > t2) std::swap(t1, t2);
      CHECK(D(t1) >= D(t2) - 1e-12);
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      double sup = 1.2;
      for (std::size_t j = i; j < t.size(); ++j) sup = std::max(sup, q[j] / std::log(t[j]));
      CHECK(D(t[i]) >= sup - 1e-12);
    }
  }

  TEST_CASE("first anchor lies on the first ramp") {
    const auto a = build_counterexample(1.0, 2.0, 0.01, 1e8);
    const auto grid = GridSpec::log_uniform(kE, 1e8, 200.0);
    const auto L = find_anchor_sequences(a, 2.0, 1.0, 0.5, EpsRule{0.25, 0.5}, grid);
    REQUIRE(L.cycles() >= 2);
    CHECK(L.r[0] < 4.0);
    CHECK(L.r[0] > 4.0 - 0.01 * 2.0);
    CHECK(growth_index(a, L.r[0]) == Approx(1.75).epsilon(1e-9));
    for (std::size_t n = 0; n < L.cycles(); ++n) {
      const double lhs = 1.5 * std::log(L.r_star[n]);
      const double rhs = 1.25 * std::log(L.r_prime[n]);
      CHECK(std::abs(lhs - rhs) / rhs < 1e-10);
      CHECK(L.r[n] < L.r_star[n]);
      CHECK(L.r_star[n] < L.r_prime[n]);
    }
  }

  TEST_CASE("pure power admits no construction") {
    const GrowthFunction sq(PowerLaw{1.0, 2.0}, kE, 1e8);
    const auto grid = GridSpec::log_uniform(kE, 1e8, 50.0);
    CHECK_THROWS_AS(find_anchor_sequences(sq, 2.0, 1.0, 0.5, {}, grid), InfeasibleError);
    const GrowthFunction mid(PowerLaw{1.0, 1.7}, kE, 1e8);
    CHECK_THROWS_AS(build_qpo(mid, 2.0, 1.0, 0.5, grid), InfeasibleError);
    CHECK_THROWS_AS(build_qpo(mid, 2.0, 1.0, 1.5, grid), ParameterError);
  }

  TEST_CASE("excursion envelope ends at lambda + eta") {
    const auto& r = run();
    const auto& L = r.build.ledger;
    for (std::size_t n = 0; n < L.cycles(); ++n) {
      const auto ex = excursion_profile(r.a, r.grid, L, n);
      CHECK(ex.D(L.r_star[n]) == 1.5);
      CHECK(ex.M == Approx(L.M[n]));
      CHECK(ex.R == L.R[n]);
      // brute-force maximum of d on the grid part of the excursion
      const double lo = n == 0 ? r.grid.points.front() : L.r[n];
      double m = 0.0;
      for (double t : r.grid.points)
        if (t >= lo && t <= L.r_star[n]) m = std::max(m, growth_index(r.a, t));
      CHECK(ex.M >= m - 1e-12);
    }
  }

  TEST_CASE("constant envelope gives a single stair") {
    const Envelope D({10.0, 1e3}, {1.5 * std::log(10.0), 1.5 * std::log(1e3)}, 1.5);
    const auto st = stair_descent(D, 10.0, 1e3, 1.5, 2.0);
    REQUIRE(st.segments.size() == 1);
    CHECK(st.segments[0].kind == SegmentKind::constant);
    CHECK(st.end_value == 1.5);
    CHECK_FALSE(st.clamped);
  }

  TEST_CASE("rise connector slope") {
    const auto flat = connect_rise(1.5, 1.5, 10.0, 20.0, 30.0, 1.0, 0.5);
    CHECK(flat.C == 0.0);
    const auto r = connect_rise(1.5, 1.9, 10.0, 20.0, 30.0, 1.0, 0.5);
    CHECK(r.C == Approx(2.1937).epsilon(1e-4));
    CHECK_FALSE(r.descending);
    CHECK(connect_rise(1.9, 1.5, 10.0, 20.0, 30.0, 1.0, 0.5).descending);
  }

  TEST_CASE("connector reaches M_{n+1} at r_n' on the counterexample") {
    const auto& r = run();
    const auto& L = r.build.ledger;
    for (std::size_t n = 0; n + 1 < L.cycles(); ++n) {
      const double s_star = 1.5;  // stair end value, D(r_n*) = lambda + eta
      const auto rise = connect_rise(s_star, L.M[n + 1], L.r_star[n], L.r_prime[n], L.r[n + 1],
                                     1.0, 0.5);
      CHECK(rise.rise.value_x(log_log(L.r_prime[n])) == Approx(L.M[n + 1]).epsilon(1e-9));
    }
  }

  TEST_CASE("counterexample build passes every property") {
    const auto& r = run();
    const auto rep = verify_qpo(*r.build.sigma, *r.build.majorant, r.a, r.grid);
    for (const auto& c : rep.checks) {
      INFO(c.name << ": " << c.note);
      CHECK(c.passed());
    }
    CHECK(rep.checks.size() == 6);
  }

  TEST_CASE("sandwich and majorization at random points") {
    const auto& r = run();
    const auto& s = *r.build.sigma;
    const auto& m = *r.build.majorant;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1.0, std::log(1e8));
    for (int i = 0; i < 3000; ++i) {
      const double t = std::exp(u(rng));
      const double lp = s(t) * std::log(t);
      CHECK(m.log_value(t) <= lp + 1e-12 * std::max(1.0, lp));
      CHECK(r.a.log_value(t) <= lp + 1e-12 * std::max(1.0, lp));
    }
  }

  TEST_CASE("constant sigma with matching majorant has zero slack") {
    auto s = std::make_shared<const PiecewiseProximateOrder>(
        std::vector<Segment>{Segment::constant(kE, 1e6, 1.5)}, 1.5, 1.0, 0.5);
    AssociatedMajorant m(s, {});
    const GrowthFunction a(PowerLaw{1.0, 1.5}, kE, 1e6);
    const auto rep = verify_qpo(*s, m, a, GridSpec::log_uniform(kE, 1e6, 20.0));
    CHECK(rep.all_passed());
    CHECK(rep.at("majorization").measured <= 0.0);
  }

  TEST_CASE("steep descent breaks monotone A*") {
    std::vector<Segment> segs{
        Segment::constant(kE, 100.0, 2.0),
        Segment::loglog(SegmentKind::loglog_descent, 100.0, 120.0, 100.0, 2.0, -10.0),
    };
    const double tail = segs[1].value_x(log_log(120.0));
    segs.push_back(Segment::constant(120.0, 1e6, tail));
    auto s = std::make_shared<const PiecewiseProximateOrder>(segs, 2.0, 1.0, 0.5);
    AssociatedMajorant m(s, {});
    const GrowthFunction a(ConstantGrowth{1.0}, kE, 1e6);
    const auto rep = verify_qpo(*s, m, a, GridSpec::log_uniform(kE, 1e6, 200.0));
    const auto& c = rep.at("majorant_monotone");
    CHECK(c.status == CheckStatus::fail);
    CHECK(c.worst_location > 100.0);
    CHECK(c.worst_location <= 121.0);
  }

  TEST_CASE("eta sweep witness against the lower bound") {
    const auto rows = eta_necessity_sweep(1.0, 2.0, {0.5, 0.1});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].lower_bound == Approx(1.2331).epsilon(1e-4));
    CHECK(rows[1].lower_bound == Approx(9.441).epsilon(1e-3));
    CHECK(rows[0].witness >= 0.9 * rows[0].lower_bound);
    CHECK(rows[1].witness >= 0.9 * rows[1].lower_bound);
    CHECK(rows[1].witness > rows[0].witness);
    CHECK_THROWS_AS(eta_necessity_sweep(1.0, 2.0, {0.1, 0.5}), ParameterError);
  }

  TEST_CASE("qpo table columns") {
    const auto& r = run();
    const auto tab = qpo_table(*r.build.sigma, *r.build.majorant, r.a, r.grid);
    CHECK(tab.header == std::vector<std::string>{"t", "sigma", "t_pow_sigma", "A", "A_star",
                                                 "deriv_witness"});
    CHECK(tab.rows.size() == r.grid.points.size());
  }
}
