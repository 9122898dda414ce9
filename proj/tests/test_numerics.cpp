#include "qpo/csv.hpp"
#include "qpo/errors.hpp"
#include "qpo/numerics.hpp"
#include "qpo/report.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

using namespace qpo;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("numerics") {
  TEST_CASE("log_uniform_points covers the range") {
    const auto pts = log_uniform_points(10.0, 1e4, 10.0);
    CHECK(pts.size() == 31);
    CHECK(pts(0) == doctest::Approx(10.0));
    CHECK(pts(pts.size() - 1) == doctest::Approx(1e4));
    for (Eigen::Index i = 1; i < pts.size(); ++i) CHECK(pts(i) > pts(i - 1));
    CHECK_THROWS_AS(log_uniform_points(5.0, 1.0, 10.0), ParameterError);
  }

  TEST_CASE("integrate matches closed forms") {
    CHECK(integrate([](double x) { return x * x; }, 0.0, 3.0).value ==
          doctest::Approx(9.0).epsilon(1e-12));
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi).value ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-8).value ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    CHECK_THROWS_AS(integrate([](double x) { return 1.0 / x; }, 0.0, 1.0), NumericError);
  }

  TEST_CASE("bisect_bracket locates a sign change") {
    auto [lo, hi] = bisect_bracket([](double x) { return x * x < 2.0; }, 0.0, 2.0);
    CHECK(lo <= std::sqrt(2.0));
    CHECK(hi >= std::sqrt(2.0));
    CHECK(hi - lo < 1e-11);
  }

  TEST_CASE("least squares slope recovers a line through noise-free data") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int rep = 0; rep < 20; ++rep) {
      const double a = u(rng), b = u(rng);
      std::vector<double> x, y;
      for (int i = 0; i < 15; ++i) {
        x.push_back(u(rng));
        y.push_back(a * x.back() + b);
      }
      CHECK(least_squares_slope(x, y) == doctest::Approx(a).epsilon(1e-9));
    }
    std::vector<double> one{1.0};
    CHECK_THROWS_AS(least_squares_slope(one, one), ParameterError);
  }

  TEST_CASE("csv output is deterministic and header-only when empty") {
    const auto dir = std::filesystem::temp_directory_path() / "qpo_test_csv";
    std::filesystem::create_directories(dir);
    const std::string p = (dir / "empty.csv").string();
    write_csv(p, CsvTable{{"t", "sigma"}, {}});
    CHECK(slurp(p) == "t,sigma\n");

    CsvTable t{{"x", "y"}, {{0.1, 1e300}, {-2.5, std::numeric_limits<double>::infinity()}}};
    const std::string q1 = (dir / "a.csv").string(), q2 = (dir / "b.csv").string();
    write_csv(q1, t);
    write_csv(q2, t);
    CHECK(slurp(q1) == slurp(q2));
    CHECK(std::stod(format_number(0.1)) == 0.1);
    CHECK_THROWS(write_csv("/nonexistent_dir/x.csv", t));
  }

  TEST_CASE("report aggregation ignores trend-only entries") {
    PropertyReport r;
    PropertyCheck a("a");
    a.status = CheckStatus::pass;
    PropertyCheck b("b");
    b.status = CheckStatus::trend_only;
    r.checks = {a, b};
    CHECK(r.all_passed());
    r.checks.push_back(PropertyCheck("c"));
    CHECK_FALSE(r.all_passed());
    CHECK(r.at("b").status == CheckStatus::trend_only);
    CHECK(r.to_json()["checks"].size() == 3);
  }
}
