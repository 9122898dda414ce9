#include "qpo/report.hpp"

#include <algorithm>
#include <stdexcept>

namespace qpo {

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::trend_only: return "trend_only";
    case CheckStatus::hypothesis_unmet: return "hypothesis_unmet";
    case CheckStatus::hypothesis_out_of_range: return "hypothesis_out_of_range";
  }
  return "unknown";
}

bool PropertyReport::all_passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const PropertyCheck& c) { return c.status == CheckStatus::fail; });
}

const PropertyCheck& PropertyReport::at(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no check named '" + name + "'");
}

nlohmann::json PropertyReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json j{{"name", c.name},
                     {"status", to_string(c.status)},
                     {"measured", c.measured},
                     {"bound", c.bound},
                     {"worst_location", c.worst_location},
                     {"windowed", c.windowed}};
    if (!c.note.empty()) j["note"] = c.note;
    arr.push_back(std::move(j));
  }
  return {{"checks", arr}, {"metrics", metrics}, {"all_passed", all_passed()}};
}

}  // namespace qpo
