#include "qpo/disc.hpp"
#include "qpo/errors.hpp"
#include "qpo/growth.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace qpo;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

ZeroSequence zs(std::vector<cplx> pts) { return ZeroSequence(std::move(pts)); }

AnalyticFunctionModel constant(double c, double r_max = 0.999) {
  return AnalyticFunctionModel::closed_form(ClosedForm::constant, {c}, r_max);
}

AnalyticFunctionModel identity() {
  return AnalyticFunctionModel::closed_form(ClosedForm::monomial, {1.0, 1.0}, 0.999);
}

// (1/2pi) int log|f(re^{i theta})| d theta by trapezoid doubling.
double circle_mean_log(const AnalyticFunctionModel& f, double r) {
  double prev = NAN;
  for (int n = 256; n <= (1 << 18); n *= 2) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += f.log_abs(std::polar(r, 2.0 * kPi * (k + 0.5) / n));
    s /= n;
    if (std::abs(s - prev) < 1e-12) return s;
    prev = s;
  }
  return prev;
}

}  // namespace

TEST_SUITE("disc") {
  TEST_CASE("zero sequence ordering and validation") {
    ZeroSequence z({{0.5, 0.5}, {0.1, 0.0}, {0.0, -0.3}});
    CHECK(std::abs(z.points()[0]) <= std::abs(z.points()[1]));
    CHECK(std::abs(z.points()[1]) <= std::abs(z.points()[2]));
    CHECK_THROWS_AS(zs({cplx(1.0, 0.0)}), ParameterError);
    CHECK(z.genus_sum(1) == Approx(0.9 * 0.9 + 0.7 * 0.7 + std::pow(1 - std::sqrt(0.5), 2)));
  }

  TEST_CASE("zero sequence csv round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "qpo_test_disc";
    std::filesystem::create_directories(dir);
    ZeroSequence z({{0.25, -0.125}, {0.0, 0.9}});
    const std::string p = (dir / "zeros.csv").string();
    z.write_csv(p);
    const auto back = ZeroSequence::read_csv(p);
    REQUIRE(back.size() == 2);
    CHECK(back.points()[0] == z.points()[0]);
    CHECK(back.points()[1] == z.points()[1]);
  }

  TEST_CASE("max modulus") {
    CHECK(max_modulus(identity(), 0.5) == Approx(0.5));
    const auto f = AnalyticFunctionModel::closed_form(ClosedForm::exp_pole, {1.0, 1.0}, 0.99);
    CHECK(log_max_modulus(f, 0.9) == Approx(10.0).epsilon(1e-12));
    CHECK(max_modulus(constant(3.0), 0.7) == Approx(3.0));
    CHECK_THROWS_AS(log_max_modulus(f, 0.9, 16), ParameterError);
    // log form survives where |f| overflows
    const auto g = AnalyticFunctionModel::closed_form(ClosedForm::exp_pole, {1.0, 2.0}, 0.9999);
    CHECK(log_max_modulus(g, 0.999) == Approx(1e6).epsilon(1e-9));
  }

  TEST_CASE("max modulus agrees with dense sampling") {
    const auto f = AnalyticFunctionModel::closed_form(ClosedForm::pole_power, {1.5, 1.0, -1.0}, 0.99);
    for (double r : {0.3, 0.6, 0.9}) {
      double best = -1e300;
      for (int k = 0; k < 100000; ++k) best = std::max(best, f.log_abs(std::polar(r, 2 * kPi * k / 100000)));
      CHECK(log_max_modulus(f, r) >= best - 1e-12);
      CHECK(log_max_modulus(f, r) <= best + 1e-6);
    }
  }

  TEST_CASE("orders of closed forms") {
    const auto g1 = DiscGrid::log_gaps(0.1, 1e-4, 10.0);
    const auto f1 = AnalyticFunctionModel::closed_form(ClosedForm::exp_pole, {1.0, 1.0}, 1.0 - 1e-5);
    const auto e1 = disc_orders(f1, g1);
    CHECK(e1.upper == Approx(1.0).epsilon(0.05));
    CHECK(e1.lower == Approx(1.0).epsilon(0.05));
    const auto f2 = AnalyticFunctionModel::closed_form(ClosedForm::exp_pole, {1.0, 2.0}, 1.0 - 1e-5);
    CHECK(disc_orders(f2, g1).upper == Approx(2.0).epsilon(0.05));
    // log M <= 1 keeps log^+ log^+ M at zero
    const auto poly = AnalyticFunctionModel::power_series({1.0, 0.5, 0.25}, 1.0 - 1e-5);
    const auto e3 = disc_orders(poly, g1);
    CHECK(e3.upper == 0.0);
    CHECK(e3.lower == 0.0);
    // bounded M with log M > 1 leaves a term of order 1/log(1/(1-r))
    const auto sq = AnalyticFunctionModel::power_series({1.0, 2.0, 1.0}, 1.0 - 1e-5);
    const auto e4 = disc_orders(sq, g1);
    CHECK(e4.upper > 0.0);
    CHECK(e4.upper < 0.06);
  }

  TEST_CASE("integral means") {
    for (double p : {1.0, 2.0, 4.0}) {
      CHECK(integral_mean_p(constant(kE), 0.8, p).value == Approx(1.0).epsilon(1e-12));
      CHECK(integral_mean_p(identity(), 0.5, p).value == Approx(std::log(2.0)).epsilon(1e-12));
    }
    const auto f = AnalyticFunctionModel::closed_form(ClosedForm::exp_cayley, {1.0}, 0.99);
    CHECK(integral_mean_p(f, 0.9, 1.0).value == Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(integral_mean_p(f, 0.9, 0.5), ParameterError);
    const auto e = mean_orders(constant(kE), 2.0, DiscGrid::log_gaps(0.1, 1e-3, 5.0));
    CHECK(e.upper == 0.0);
    CHECK(e.lower == 0.0);
  }

  TEST_CASE("shared-sample means equal single means") {
    const auto f = AnalyticFunctionModel::closed_form(ClosedForm::exp_pole, {1.0, 2.0}, 0.999);
    const std::vector<double> ps{1.0, 2.0, 4.0};
    const auto all = integral_means(f, 0.98, ps);
    for (std::size_t k = 0; k < ps.size(); ++k)
      CHECK(all[k].value == Approx(integral_mean_p(f, 0.98, ps[k]).value).epsilon(1e-6));
    CHECK(all[0].value <= all[1].value * (1 + 1e-12));
    CHECK(all[1].value <= all[2].value * (1 + 1e-12));
  }

  TEST_CASE("mean across a zero on the circle is retried") {
    const auto z = zs({cplx(0.5, 0.0)});
    const auto f = AnalyticFunctionModel::canonical_product(z, 1, 0.99);
    const auto m = integral_mean_p(f, 0.5, 1.0);
    CHECK(std::isfinite(m.value));
    CHECK(m.radius < 0.5);
  }

  TEST_CASE("zero counts in polar rectangles") {
    CHECK(zero_count_polar(ZeroSequence{}, 0.5) == 0);
    CHECK(zero_count_polar(zs({{0.9, 0.0}}), 0.8) == 1);
    CHECK(zero_count_polar(zs({std::polar(0.95, kPi / 2)}), 0.8) == 0);
    CHECK(zero_count_polar_brute(zs({{0.9, 0.0}}), 0.8, 10000) == 1);
    // window wraps through the negative real axis
    ZeroSequence wrap({std::polar(0.85, kPi - 0.01), std::polar(0.85, -kPi + 0.01)});
    CHECK(zero_count_polar(wrap, 0.8) == 2);
  }

  TEST_CASE("zero counts in discs") {
    CHECK(zero_count_disc(zs({{0.5, 0.0}}), 0.5, 0.01) == 1);
    CHECK(zero_count_disc(zs({{0.5, 0.0}}), 0.0, 0.1) == 0);
    std::vector<cplx> pts;
    for (int k = 0; k < 100; ++k) pts.push_back(std::polar(0.9, 2 * kPi * k / 100));
    ZeroSequence z(pts);
    int brute = 0;
    for (const auto& a : pts) brute += std::abs(a - cplx(0.9, 0.0)) <= 0.05;
    CHECK(zero_count_disc(z, 0.9, 0.05) == brute);
  }

  TEST_CASE("primary factor and kernel") {
    for (int s : {0, 1, 2, 5}) {
      CHECK(std::abs(weierstrass_factor(0.0, s) - 1.0) < 1e-15);
      CHECK(std::abs(weierstrass_factor(1.0, s)) == 0.0);
    }
    CHECK(weierstrass_factor(0.5, 1).real() == Approx(0.824361).epsilon(1e-6));
    for (const cplx z : {cplx(0.3, 0.2), cplx(-0.7, 0.1)}) {
      CHECK(std::abs(interpolation_kernel(z, 0.0) - 1.0) < 1e-15);
      for (int s : {1, 3}) {
        const cplx w = z * 0.9;
        CHECK(std::abs(std::exp(log_weierstrass_factor(w, s)) - weierstrass_factor(w, s)) < 1e-13);
      }
    }
    const cplx zeta(0.3, -0.4);
    CHECK(std::abs(interpolation_kernel(0.0, zeta) - (1.0 - std::norm(zeta))) < 1e-15);
    CHECK(std::abs(interpolation_kernel(0.5, 0.5) - 1.0) < 1e-15);
    CHECK_THROWS_AS(interpolation_kernel(1.0, 1.0), DomainError);
  }

  TEST_CASE("canonical products") {
    CHECK(canonical_product(cplx(0.3, 0.1), ZeroSequence{}, 1).log_modulus == 0.0);
    CHECK(canonical_product(0.5, zs({{0.5, 0.0}}), 1).log_modulus == -INFINITY);
    const ZeroSequence z({{0.5, 0.0}, {0.0, 0.6}});
    const auto f = AnalyticFunctionModel::canonical_product(z, 1, 0.99);
    const double log0 = canonical_product(0.0, z, 1).log_modulus;
    const double r = 0.8;
    const double jensen = log0 + std::log(r / 0.5) + std::log(r / 0.6);
    CHECK(circle_mean_log(f, r) == Approx(jensen).epsilon(1e-9));
    CHECK(f.log_abs(0.5) == -INFINITY);
  }

  TEST_CASE("tsuji sum and exceptional discs") {
    CHECK(tsuji_sum(0.3, ZeroSequence{}, 2.0) == 0.0);
    CHECK(tsuji_sum(0.5, zs({{0.0, 0.0}}), 2.0) == Approx(1.0));
    const auto d = exceptional_discs(zs({{0.9, 0.0}}), 0.0);
    REQUIRE(d.size() == 1);
    CHECK(d[0].radius == Approx(0.00130321).epsilon(1e-6));
    CHECK_FALSE(in_exceptional_set(cplx(-0.5, 0.0), d));
    CHECK(in_exceptional_set(cplx(0.9005, 0.0), d));
  }

  TEST_CASE("smoothing integral") {
    CHECK(smoothing_integral_I_alpha(constant(1.0), 0.75, 0.5, 0.0) == 0.0);
    CHECK(smoothing_integral_I_alpha(constant(kE), 0.75, 0.5, 0.0) == Approx(20.5).epsilon(1e-8));
    const auto f = AnalyticFunctionModel::closed_form(ClosedForm::exp_pole, {1.0, 1.0}, 0.99);
    double prev = 0.0;
    for (double R = 0.2; R < 0.95; R += 0.05) {
      const double v = smoothing_integral_I_alpha(f, R, 0.7, 0.1);
      CHECK(v >= prev);
      prev = v;
    }
    CHECK_THROWS_AS(smoothing_integral_I_alpha(f, 0.5, 0.3, 0.0), ParameterError);
  }

  TEST_CASE("upper density") {
    std::vector<double> grid;
    for (int j = 1; j <= 40; ++j) grid.push_back(1.0 - std::ldexp(1.0, -j));
    CHECK(upper_density(RadialSet({{0.0, 1.0}}), grid) == Approx(1.0));
    CHECK(upper_density(RadialSet{}, grid) == 0.0);
    std::vector<std::pair<double, double>> iv;
    for (int k = 1; k <= 25; ++k) iv.push_back({1.0 - std::ldexp(1.0, -2 * k), 1.0 - std::ldexp(1.0, -2 * k - 1)});
    CHECK(upper_density(RadialSet(iv), grid) >= 0.5);
    CHECK_THROWS_AS(RadialSet({{0.5, 0.7}, {0.6, 0.8}}), ParameterError);
  }

  TEST_CASE("Polya order and psi tilde") {
    std::vector<double> lc, lx;
    for (double v = 0.5; v <= 1000.0; v += 0.5) lc.push_back(v);
    for (double v = 0.0; v <= 1000.0; v += 5.0) lx.push_back(v);
    const auto sq = polya_order([](double u) { return 2.0 * u; }, lc, lx, 2000.0);
    CHECK(sq.order == Approx(2.0).epsilon(0.025));
    // log log(1 + e^u) without overflow
    auto log_log1p_exp = [](double u) {
      return std::log(u > 30.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)));
    };
    const auto lg = polya_order(log_log1p_exp, lc, lx, 2000.0);
    CHECK(lg.order <= 0.05);
    const auto ex = polya_order([](double u) { return std::exp(u); }, lc, lx, 50.0);
    CHECK_FALSE(ex.doubling_bounded);
    CHECK(ex.order == INFINITY);

    CHECK(psi_tilde([](double) { return 1.0; }, 50.0) == Approx(std::log(50.0)).epsilon(1e-12));
    CHECK(psi_tilde([](double x) { return x; }, 50.0) == Approx(49.0).epsilon(1e-12));
  }

  TEST_CASE("gap series from constant and logarithmic profiles") {
    std::vector<double> radii;
    for (int j = 1; j <= 30; ++j) radii.push_back(1.0 - std::pow(10.0, -j / 5.0));
    const auto c = gap_series_from_profile([](double) { return 2.0; }, radii);
    REQUIRE(c.model.exponents().size() == 1);
    CHECK(c.model.exponents()[0] == 0.0);
    CHECK(c.model.log_coefficients()[0] == Approx(2.0));

    const auto b = gap_series_from_profile([](double r) { return std::log(1.0 / (1.0 - r)); }, radii);
    REQUIRE_FALSE(b.contact_radii.empty());
    for (double r : b.contact_radii) {
      const double target = std::log(1.0 / (1.0 - r));
      if (target < 1.0) continue;
      CHECK(log_max_term(b.model, r) == Approx(target).epsilon(0.02));
    }
  }

  TEST_CASE("gap series from the counterexample profile") {
    const auto a = build_counterexample(0.3, 0.8, 0.01, 1.01e12);
    const auto grid = DiscGrid::log_gaps(0.3, 1e-12, 10.0);
    const auto b = gap_series_from_profile([&](double r) { return a(1.0 / (1.0 - r)); }, grid.radii);
    const auto e = disc_orders(b.model, grid);
    CHECK(e.upper == Approx(0.8).epsilon(0.1 / 0.8));
    CHECK(e.lower == Approx(0.3).epsilon(0.1 / 0.3));
  }

  TEST_CASE("gap series zeros solve the series") {
    const auto s = AnalyticFunctionModel::gap_series({0.0, 4.0, 20.0}, {0.0, 2.0, 5.0}, 0.99);
    const auto z = gap_series_zeros(s, 0.99);
    CHECK(z.size() == 20);
    for (const auto& a : z.points()) CHECK(std::abs(s.eval(a)) < 1e-8 * std::exp(log_max_term(s, std::abs(a))));
  }
}
