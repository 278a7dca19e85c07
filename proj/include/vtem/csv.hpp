#pragma once

#include "vtem/estimators.hpp"
#include "vtem/scheme.hpp"

#include <string>
#include <vector>

namespace vtem {

// All numbers are serialized with 17 significant digits so doubles
// round-trip exactly.
std::string format_double(double v);

// Generic table: header row plus numeric rows.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string to_string() const;
  void write(const std::string& path) const;
};

CsvTable error_report_csv(const ErrorReport& report);
CsvTable moment_report_csv(const MomentReport& report);
CsvTable stability_report_csv(const StabilityReport& report);
// Path CSV columns: step, t, y_1..y_d, v, truncated(0/1).
CsvTable path_csv(const PathResult& path, const TruncationPolicy* policy);

}  // namespace vtem
