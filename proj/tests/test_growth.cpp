#include "qpo/errors.hpp"
#include "qpo/growth.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qpo;
using doctest::Approx;

namespace {

constexpr double kE = std::numbers::e;

}  // namespace

TEST_SUITE("growth") {
  TEST_CASE("step with ramps takes the staircase and ramp values") {
    const auto a = build_counterexample(1.0, 2.0, 0.01);
    CHECK(a(3.0) == Approx(4.0));
    CHECK(a(4.0) == Approx(16.0));
    // halfway along the ramp ending at 16: A is linear in t there
    const double w = 0.01 * (16.0 - 4.0);
    CHECK(a(16.0 - w / 2) == Approx((16.0 + 256.0) / 2));
  }

  TEST_CASE("constant table") {
    const GrowthFunction a(TableGrowth{{kE, kE * kE}, {1.0, 1.0}}, kE, kE * kE);
    CHECK(a(kE) == Approx(1.0));
    CHECK(a(5.0) == Approx(1.0));
  }

  TEST_CASE("out-of-domain evaluation") {
    const GrowthFunction a(PowerLaw{1.0, 2.0}, kE, 100.0);
    CHECK_THROWS_AS(a(2.0), DomainError);
    CHECK_THROWS_AS(a(101.0), DomainError);
  }

  TEST_CASE("growth index") {
    const GrowthFunction one(ConstantGrowth{1.0}, kE, 1e6);
    CHECK(growth_index(one, 50.0) == 0.0);
    const auto step = build_counterexample(1.0, 2.0, 0.01);
    CHECK(growth_index(step, 4.0) == Approx(2.0));
    const GrowthFunction p(PowerLaw{1.0, 1.5}, kE, 1e6);
    CHECK(growth_index(p, std::exp(3.0)) == Approx(1.5));
    CHECK_THROWS_AS(growth_index(p, 2.0), DomainError);
  }

  TEST_CASE("counterexample knots follow r_{n+1} = r_n^{rho/lambda}") {
    const auto a = build_counterexample(1.0, 2.0, 0.01);
    const auto& s = std::get<StepWithRamps>(a.rule());
    REQUIRE(s.knots.size() >= 5);
    const double expect[] = {2.0, 4.0, 16.0, 256.0, 65536.0};
    for (int i = 0; i < 5; ++i) CHECK(s.knots[i] == Approx(expect[i]));
    CHECK_THROWS_AS(build_counterexample(2.0, 1.0), ParameterError);
    CHECK_THROWS_AS(build_counterexample(0.0, 1.0), ParameterError);
  }

  TEST_CASE("counterexample stays between the two powers") {
    const auto a = build_counterexample(1.0, 2.0, 0.01, 1e8);
    const auto grid = GridSpec::log_uniform(kE, 1e8, 10000.0 / 7.5);
    REQUIRE(grid.points.size() >= 10000);
    int bad = 0;
    for (double t : grid.points) {
      const double la = a.log_value(t), lt = std::log(t);
      if (!(lt < la && la <= 2.0 * lt * (1.0 + 1e-12))) ++bad;
    }
    CHECK(bad == 0);
  }

  TEST_CASE("counterexample is non-decreasing") {
    const auto a = build_counterexample(1.0, 2.0, 0.01, 1e8);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(1.0, std::log(1e8));
    for (int i = 0; i < 2000; ++i) {
      double t1 = std::exp(u(rng)), t2 = std::exp(u(rng));
      if (t1 > t2) std::swap(t1, t2);
      CHECK(a.log_value(t1) <= a.log_value(t2));
    }
  }

  TEST_CASE("estimate_orders on pure and step growth") {
    const GrowthFunction sq(PowerLaw{1.0, 2.0}, kE, 1e8);
    const auto e = estimate_orders(sq, GridSpec::log_uniform(kE, 1e8, 50.0));
    CHECK(e.rho_hat == Approx(2.0).epsilon(1e-9));
    CHECK(e.lambda_hat == Approx(2.0).epsilon(1e-9));

    const auto step = build_counterexample(1.0, 2.0, 0.01, 1e6);
    const auto s = estimate_orders(step, GridSpec::log_uniform(kE, 1e6, 200.0));
    CHECK(s.rho_hat >= 1.9);
    CHECK(s.rho_hat <= 2.0 + 1e-12);
    CHECK(s.lambda_hat >= 1.0);
    CHECK(s.lambda_hat <= 1.1);
  }

  TEST_CASE("estimate_orders matches a brute-force oracle for oscillating growth") {
    const GrowthFunction a(OscillatingPower{1.5, 0.5}, kE, 1e12);
    const auto grid = GridSpec::log_uniform(kE, 1e12, 50.0);
    const auto e = estimate_orders(a, grid);
    double hi = -1e300, lo = 1e300;
    for (std::size_t i = grid.points.size() / 2; i < grid.points.size(); ++i) {
      const double t = grid.points[i];
      const double d = 1.5 + 0.5 * std::sin(std::log(std::log(std::log(t))));
      hi = std::max(hi, d);
      lo = std::min(lo, d);
    }
    CHECK(e.rho_hat == Approx(hi).epsilon(1e-9));
    CHECK(e.lambda_hat == Approx(lo).epsilon(1e-9));
    REQUIRE_FALSE(e.window_report.empty());
    CHECK(e.window_report.back().running_sup == Approx(e.rho_hat));
  }

  TEST_CASE("estimate_orders rejects a short grid") {
    const GrowthFunction sq(PowerLaw{1.0, 2.0}, kE, 100.0);
    CHECK_THROWS_AS(estimate_orders(sq, GridSpec::log_uniform(kE, 100.0, 10.0)), ConfigError);
  }

  TEST_CASE("json round trip") {
    const auto a = build_counterexample(1.0, 2.0, 0.01, 1e8).raised(0.5);
    const auto b = GrowthFunction::from_json(a.to_json());
    for (double t : {3.0, 10.0, 300.0, 7e4, 9e7}) CHECK(b.log_value(t) == a.log_value(t));
    CHECK(b.kind() == "step_with_ramps");
    CHECK_THROWS_AS(GrowthFunction::from_json({{"kind", "nope"}, {"params", {}}, {"domain", {3, 4}}}),
                    ParameterError);
  }
}
