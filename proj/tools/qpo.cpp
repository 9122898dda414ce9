// Command-line front end for the experiment drivers.

#include "qpo/construction.hpp"
#include "qpo/errors.hpp"
#include "qpo/growth.hpp"
#include "qpo/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <string>

namespace {

constexpr int kExitConfig = 3;
constexpr int kExitRuntime = 4;

// Numeric overrides keyed by config field; only flags given on the command
// line are copied into the config.
struct Overrides {
  std::map<std::string, double> values;
  std::vector<double> p_list, etas;
  std::string out;
  unsigned long long seed = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* p_opt = nullptr;
  CLI::Option* etas_opt = nullptr;
};

void add_overrides(CLI::App* app, Overrides& o) {
  static const char* fields[] = {"lambda", "rho", "eta", "eps1", "eps", "ramp", "per_decade",
                                 "radii_per_decade", "t_max", "r_max", "q", "l_mean",
                                 "l_amplitude", "a"};
  for (const char* f : fields) {
    std::string flag = std::string("--") + f;
    for (auto& ch : flag)
      if (ch == '_') ch = '-';
    app->add_option_function<double>(flag, [&o, f](const double& v) { o.values[f] = v; },
                                     std::string("override ") + f);
  }
  o.p_opt = app->add_option("--p", o.p_list, "p list for integral means")->delimiter(',');
  o.etas_opt = app->add_option("--etas", o.etas, "eta list for the sweep")->delimiter(',');
  o.seed_opt = app->add_option("--seed", o.seed, "seed recorded in the outputs");
  app->add_option("--out", o.out, "output directory (beats QPO_OUT and the config)");
}

nlohmann::json with_overrides(nlohmann::json j, const Overrides& o) {
  for (const auto& [k, v] : o.values) j[k] = v;
  if (o.p_opt->count()) j["p"] = o.p_list;
  if (o.etas_opt->count()) j["etas"] = o.etas;
  if (o.seed_opt->count()) j["seed"] = o.seed;
  if (const char* env = std::getenv("QPO_OUT"); env && *env) j["output_dir"] = env;
  if (!o.out.empty()) j["output_dir"] = o.out;
  return j;
}

int run_config(const nlohmann::json& j) {
  const auto cfg = qpo::config_from_json(j);
  const auto m = qpo::run_experiment(cfg);
  std::cout << qpo::to_string(cfg.id) << ": " << (m.complete ? "complete" : "incomplete");
  for (const auto& c : m.report.checks)
    std::cout << "\n  " << c.name << " " << qpo::to_string(c.status) << " measured=" << c.measured
              << " bound=" << c.bound;
  if (!m.error.empty()) std::cout << "\n  error: " << m.error;
  std::cout << "\n  output: " << cfg.output_dir << "\n";
  return m.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi proximate order toolkit"};
  app.require_subcommand(1);

  Overrides run_o, build_o, verify_o, disc_o, strip_o;
  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path, "config file")->required();
  add_overrides(run, run_o);

  auto* build = app.add_subcommand("build", "build a quasi proximate order for the step counterexample");
  add_overrides(build, build_o);

  auto* verify = app.add_subcommand("verify", "build and print the property report as JSON");
  add_overrides(verify, verify_o);

  double cx_lambda = 1.0, cx_rho = 2.0, cx_ramp = 0.01, cx_tmax = 1e8, cx_density = 200.0;
  std::string cx_out = "counterexample.csv";
  auto* cx = app.add_subcommand("counterexample", "sample the step-with-ramps growth function");
  cx->add_option("--lambda", cx_lambda);
  cx->add_option("--rho", cx_rho);
  cx->add_option("--ramp", cx_ramp);
  cx->add_option("--t-max", cx_tmax);
  cx->add_option("--per-decade", cx_density);
  cx->add_option("--out", cx_out, "CSV path");

  std::string disc_exp = "linden";
  auto* disc = app.add_subcommand("disc", "disc experiments: linden, thm2, prop2");
  disc->add_option("experiment", disc_exp)->check(CLI::IsMember({"linden", "thm2", "prop2"}));
  add_overrides(disc, disc_o);

  std::string strip_exp = "warschawski";
  auto* strip = app.add_subcommand("strip", "strip experiments: warschawski, prop3, thm3");
  strip->add_option("experiment", strip_exp)
      ->check(CLI::IsMember({"warschawski", "prop3", "thm3"}));
  add_overrides(strip, strip_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) {
      std::ifstream in(config_path);
      if (!in) throw qpo::ConfigError({"$: cannot open " + config_path});
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::parse_error& e) {
        throw qpo::ConfigError({std::string("$: malformed JSON: ") + e.what()});
      }
      return run_config(with_overrides(j, run_o));
    }
    if (*build) return run_config(with_overrides({{"experiment", "thm1"}}, build_o));
    if (*verify) {
      const auto cfg = qpo::config_from_json(with_overrides({{"experiment", "thm1"}}, verify_o));
      const auto a = qpo::build_counterexample(cfg.lambda, cfg.rho, cfg.ramp, cfg.t_max);
      const auto grid = qpo::GridSpec::log_uniform(std::numbers::e, cfg.t_max, cfg.per_decade);
      const auto b = qpo::build_qpo(a, cfg.rho, cfg.lambda, cfg.eta, grid, qpo::EpsRule{cfg.eps1, 0.5});
      const auto rep = qpo::verify_qpo(*b.sigma, *b.majorant, a, grid);
      std::cout << rep.to_json().dump(2) << "\n";
      return rep.all_passed() ? 0 : 2;
    }
    if (*cx) {
      const auto a = qpo::build_counterexample(cx_lambda, cx_rho, cx_ramp, cx_tmax);
      const auto grid = qpo::GridSpec::log_uniform(std::numbers::e, cx_tmax, cx_density);
      qpo::CsvTable tab{{"t", "A", "d"}, {}};
      for (double t : grid.points) tab.rows.push_back({t, a(t), qpo::growth_index(a, t)});
      qpo::export_csv(tab, cx_out);
      std::cout << a.to_json().dump() << "\n";
      return 0;
    }
    if (*disc) return run_config(with_overrides({{"experiment", disc_exp}}, disc_o));
    if (*strip) return run_config(with_overrides({{"experiment", strip_exp}}, strip_o));
  } catch (const qpo::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
