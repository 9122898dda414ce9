#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace qpo {

enum class CheckStatus { pass, fail, trend_only, hypothesis_unmet, hypothesis_out_of_range };

std::string to_string(CheckStatus s);

struct PropertyCheck {
  PropertyCheck() = default;
  explicit PropertyCheck(std::string n) : name(std::move(n)) {}

  std::string name;
  CheckStatus status = CheckStatus::fail;
  double measured = 0.0;
  double bound = 0.0;
  double worst_location = 0.0;
  std::string note;
  /// Set when the check is a finite-window surrogate of a limit statement.
  bool windowed = false;

  bool passed() const { return status == CheckStatus::pass; }
};

struct PropertyReport {
  std::vector<PropertyCheck> checks;
  /// Measured quantities recorded without a pass bound.
  nlohmann::json metrics = nlohmann::json::object();

  /// True when no check has status `fail`. Trend-only and hypothesis-gated
  /// entries do not count as failures.
  bool all_passed() const;
  const PropertyCheck& at(const std::string& name) const;
  nlohmann::json to_json() const;
};

}  // namespace qpo
