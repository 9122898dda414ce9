#pragma once

#include "qpo/csv.hpp"
#include "qpo/report.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace qpo {

enum class ExperimentId { thm1, eta_necessity, linden, thm2, prop2, prop3, thm3, warschawski };

std::string to_string(ExperimentId id);
/// Throws ConfigError for an unknown id.
ExperimentId experiment_from_string(const std::string& s);

/// Parameters for one experiment. Unset fields take per-experiment defaults
/// from `defaults_for`.
struct ExperimentConfig {
  ExperimentId id = ExperimentId::thm1;
  double lambda = 1.0;
  double rho = 2.0;
  double eta = 0.5;
  double eps1 = 0.0;  // filled with min{1, eta}/2 when unset
  double eps = 0.1;
  std::vector<double> etas{0.5, 0.25, 0.1, 0.05};
  std::vector<double> p_list{1.0, 2.0, 4.0};
  double ramp = 0.01;
  double per_decade = 200.0;        // t-grid density
  double radii_per_decade = 20.0;   // disc radius density in 1 - r
  double t_max = 1e8;
  double r_max = 1.0 - 1e-3;
  double q = 0.9;
  double l_mean = 1.7;
  double l_amplitude = 0.3;
  double a = 1.0;                   // exponent of the sector test function
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  static ExperimentConfig defaults_for(ExperimentId id);
  nlohmann::json to_json() const;
};

/// Builds a config from JSON, collecting every problem with its field path
/// before throwing ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig parse_config(const std::string& path);
/// Range checks per experiment; returns the list of problems.
std::vector<std::string> validate(const ExperimentConfig& c);

struct DriverOutput {
  PropertyReport report;
  std::vector<std::pair<std::string, CsvTable>> tables;
  nlohmann::json extra = nlohmann::json::object();
};

/// Runs the experiment without touching the file system.
DriverOutput run_driver(const ExperimentConfig& c);

struct RunManifest {
  nlohmann::json config;
  std::string code_version;
  std::string started;
  std::string finished;
  PropertyReport report;
  nlohmann::json extra;
  std::vector<std::pair<std::string, std::uintmax_t>> files;
  bool complete = false;
  std::string error;

  nlohmann::json to_json() const;
  /// 0 pass, 2 check failure, 4 runtime error.
  int exit_code() const;
};

/// Runs the driver, writes its CSVs and then manifest.json (atomically) into
/// the output directory.
RunManifest run_experiment(const ExperimentConfig& c);

void export_csv(const CsvTable& table, const std::string& path);

inline constexpr const char* kCodeVersion = "0.1.0";

}  // namespace qpo
