#include "vtem/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace vtem {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string CsvTable::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ",";
    out += columns[i];
  }
  out += "\n";
  for (const std::vector<double>& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += format_double(row[i]);
    }
    out += "\n";
  }
  return out;
}

void CsvTable::write(const std::string& path) const {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot open output file '" + path + "'");
  file << to_string();
  if (!file) throw ConfigError("failed writing output file '" + path + "'");
}

CsvTable error_report_csv(const ErrorReport& report) {
  CsvTable table;
  const bool with_u = !report.rows.empty() && report.rows.front().u_mean.has_value();
  table.columns = {"dt", "mean_error", "stderr", "paths", "q"};
  if (with_u) table.columns.push_back("u_mean_error");
  for (const ErrorRow& row : report.rows) {
    std::vector<double> r = {row.dt, row.mean_error, row.stderr_error,
                             static_cast<double>(row.paths), row.q};
    if (with_u) r.push_back(row.u_mean.value_or(std::numeric_limits<double>::quiet_NaN()));
    table.rows.push_back(std::move(r));
  }
  return table;
}

CsvTable moment_report_csv(const MomentReport& report) {
  CsvTable table;
  table.columns = {"dt", "sup_moment", "argmax_step", "stderr", "paths"};
  for (const MomentRow& row : report.rows) {
    table.rows.push_back({row.dt, row.sup_moment, static_cast<double>(row.argmax_step),
                          row.stderr_sup, static_cast<double>(row.paths)});
  }
  return table;
}

CsvTable stability_report_csv(const StabilityReport& report) {
  CsvTable table;
  table.columns = {"scheme",     "path_id", "terminal_norm",
                   "max_vrho",   "lyap_slope", "diverged",
                   "first_truncation_step", "kernel_distance"};
  for (const StabilityPathRow& row : report.rows) {
    table.rows.push_back({static_cast<double>(row.scheme),
                          static_cast<double>(row.path_id), row.terminal_norm,
                          row.max_vrho, row.lyap_slope,
                          static_cast<double>(row.diverged),
                          static_cast<double>(row.first_truncation_step),
                          row.kernel_distance});
  }
  return table;
}

CsvTable path_csv(const PathResult& path, const TruncationPolicy* policy) {
  CsvTable table;
  const int d = path.states.empty() ? 0 : static_cast<int>(path.states.front().size());
  table.columns = {"step", "t"};
  for (int i = 1; i <= d; ++i) table.columns.push_back("y_" + std::to_string(i));
  table.columns.push_back("v");
  table.columns.push_back("truncated");
  const double radius =
      policy ? truncation_radius(*policy, path.dt) : std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    std::vector<double> row;
    row.push_back(static_cast<double>(k));
    row.push_back(static_cast<double>(k) * path.dt);
    for (int i = 0; i < d; ++i) row.push_back(path.states[k][i]);
    row.push_back(path.v_values[k]);
    const bool truncated = k > 0 && k <= path.pre_truncation.size() &&
                           path.pre_truncation[k - 1].norm() >= radius;
    row.push_back(truncated ? 1.0 : 0.0);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace vtem
