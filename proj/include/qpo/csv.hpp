#pragma once

#include <string>
#include <vector>

namespace qpo {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Shortest round-trip text for a double ("%.17g"); nan and inf spelled out.
std::string format_number(double v);

/// Writes header and rows with '.' decimals and '\n' line ends. An empty
/// table yields a header-only file. Throws std::runtime_error when the path
/// cannot be written.
void write_csv(const std::string& path, const CsvTable& table);

}  // namespace qpo
