#include "vtem/vtem.h"

#include "vtem/csv.hpp"
#include "vtem/estimators.hpp"
#include "vtem/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

struct vtem_model {
  vtem::ModelBundle bundle;
};

struct vtem_report {
  vtem::CsvTable table;
  std::vector<std::pair<std::string, double>> summary;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

vtem_status translate(const std::exception& e) {
  set_error(e.what());
  if (dynamic_cast<const vtem::NumericFailure*>(&e)) return VTEM_ERR_NUMERIC;
  if (dynamic_cast<const vtem::DegenerateInput*>(&e)) return VTEM_ERR_DOMAIN;
  if (dynamic_cast<const vtem::DomainError*>(&e)) return VTEM_ERR_DOMAIN;
  if (dynamic_cast<const vtem::PolicyViolation*>(&e)) return VTEM_ERR_POLICY;
  if (dynamic_cast<const vtem::ValidationError*>(&e)) return VTEM_ERR_VALIDATION;
  return VTEM_ERR_CONFIG;
}

template <typename Fn>
vtem_status guarded(Fn&& fn) {
  try {
    fn();
    return VTEM_OK;
  } catch (const std::exception& e) {
    return translate(e);
  } catch (...) {
    set_error("unknown error");
    return VTEM_ERR_CONFIG;
  }
}

vtem::Vector to_vector(const double* data, int len) {
  vtem::Vector x(len);
  for (int i = 0; i < len; ++i) x[i] = data[i];
  return x;
}

vtem_status check_state(const vtem_model* model, const double* x, int len) {
  if (!model || !x) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  if (len != model->bundle.system.state_dim) {
    set_error("state dimension mismatch");
    return VTEM_ERR_CONFIG;
  }
  return VTEM_OK;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* vtem_last_error(void) { return g_last_error.c_str(); }

const char* vtem_version(void) { return "1.0.0"; }

int vtem_model_count(void) {
  return static_cast<int>(vtem::builtin_model_names().size());
}

const char* vtem_model_name(int index) {
  static const std::vector<std::string> names = vtem::builtin_model_names();
  if (index < 0 || index >= static_cast<int>(names.size())) return nullptr;
  return names[static_cast<std::size_t>(index)].c_str();
}

vtem_status vtem_model_open(const char* name, vtem_model** out) {
  if (!name || !out) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  return guarded([&] { *out = new vtem_model{vtem::load_builtin(name)}; });
}

vtem_status vtem_model_open_scalar_cubic(double rho, double x0,
                                         double delta_star, vtem_model** out) {
  if (!out) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  return guarded([&] {
    *out = new vtem_model{vtem::example_scalar_cubic(rho, x0, delta_star)};
  });
}

vtem_status vtem_model_open_custom(const char* name, double rho,
                                   const double* x0, int x0_len,
                                   double delta_star, vtem_model** out) {
  if (!name || !out) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  return guarded([&] {
    std::optional<double> rho_opt;
    if (!std::isnan(rho)) rho_opt = rho;
    std::optional<vtem::Vector> x0_opt;
    if (x0) x0_opt = to_vector(x0, x0_len);
    std::optional<double> ds_opt;
    if (!std::isnan(delta_star)) ds_opt = delta_star;
    *out = new vtem_model{
        vtem::load_builtin_custom(name, rho_opt, x0_opt, ds_opt)};
  });
}

vtem_status vtem_model_parse(const char* text, vtem_model** out) {
  if (!text || !out) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  return guarded([&] { *out = new vtem_model{vtem::build_polynomial_model(text)}; });
}

void vtem_model_close(vtem_model* model) { delete model; }

vtem_status vtem_model_state_dim(const vtem_model* model, int* out) {
  if (!model || !out) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  *out = model->bundle.system.state_dim;
  return VTEM_OK;
}

vtem_status vtem_model_noise_dim(const vtem_model* model, int* out) {
  if (!model || !out) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  *out = model->bundle.system.noise_dim;
  return VTEM_OK;
}

vtem_status vtem_model_delta_star(const vtem_model* model, double* out) {
  if (!model || !out) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  *out = model->bundle.policy.delta_star;
  return VTEM_OK;
}

vtem_status vtem_model_default_x0(const vtem_model* model, double* x0, int len) {
  if (!model || !x0) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  if (len != model->bundle.system.state_dim) {
    set_error("state dimension mismatch");
    return VTEM_ERR_CONFIG;
  }
  for (int i = 0; i < len; ++i) x0[i] = model->bundle.x0[i];
  return VTEM_OK;
}

vtem_status vtem_model_label(const vtem_model* model, const char** out) {
  if (!model || !out) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  *out = model->bundle.name.c_str();
  return VTEM_OK;
}

vtem_status vtem_generator(const vtem_model* model, const double* x, int len,
                           double* out) {
  vtem_status s = check_state(model, x, len);
  if (s != VTEM_OK) return s;
  return guarded([&] {
    *out = vtem::generator(model->bundle.spec, model->bundle.system,
                           to_vector(x, len));
  });
}

vtem_status vtem_generator_power(const vtem_model* model, const double* x,
                                 int len, double rho, double* out) {
  vtem_status s = check_state(model, x, len);
  if (s != VTEM_OK) return s;
  return guarded([&] {
    *out = vtem::generator_power(model->bundle.spec, model->bundle.system,
                                 to_vector(x, len), rho);
  });
}

vtem_status vtem_truncation_radius(const vtem_model* model, double dt,
                                   double* out) {
  if (!model || !out) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  return guarded([&] { *out = vtem::truncation_radius(model->bundle.policy, dt); });
}

vtem_status vtem_truncate(const vtem_model* model, double dt, const double* x,
                          int len, double* out) {
  vtem_status s = check_state(model, x, len);
  if (s != VTEM_OK) return s;
  return guarded([&] {
    const vtem::Vector y =
        vtem::truncate(model->bundle.policy, dt, to_vector(x, len));
    for (int i = 0; i < len; ++i) out[i] = y[i];
  });
}

vtem_status vtem_model_validate(const vtem_model* model, int* passed,
                                char** text_report) {
  if (!model || !passed) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  return guarded([&] {
    const vtem::ValidationReport report = vtem::validate_bundle(model->bundle);
    *passed = report.pass() ? 1 : 0;
    if (text_report) {
      std::string text = report.summary();
      for (const vtem::Violation& v : report.violations) {
        text += "\n  " + v.check + " at " + vtem::format_state(v.witness) +
                ": measured " + vtem::format_double(v.measured) + " bound " +
                vtem::format_double(v.bound) + " (" + v.detail + ")";
      }
      *text_report = dup_string(text);
    }
  });
}

void vtem_string_free(char* text) { delete[] text; }

vtem_status vtem_run_path(const vtem_model* model, int scheme, double dt,
                          double horizon, const double* x0, int x0_len,
                          uint64_t seed, int64_t path_id, vtem_report** out) {
  if (!model || !out) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  return guarded([&] {
    const vtem::ModelBundle& bundle = model->bundle;
    vtem::SchemeConfig config;
    config.kind = scheme == 0 ? vtem::SchemeKind::TruncatedEm
                              : vtem::SchemeKind::ClassicalEm;
    config.dt = dt;
    config.horizon = horizon;
    config.x0 = x0 ? to_vector(x0, x0_len) : bundle.x0;
    if (config.x0.size() != bundle.system.state_dim) {
      throw vtem::ConfigError("x0 dimension mismatch");
    }
    const vtem::BrownianGrid grid =
        vtem::brownian_grid(seed, path_id, horizon, dt, bundle.system.noise_dim);
    const vtem::TruncationPolicy* policy =
        config.kind == vtem::SchemeKind::TruncatedEm ? &bundle.policy : nullptr;
    const vtem::PathResult path =
        vtem::simulate(config, policy, bundle.system, bundle.spec, grid);
    auto* report = new vtem_report;
    report->table = vtem::path_csv(path, policy);
    report->summary.emplace_back("steps", static_cast<double>(path.steps));
    report->summary.emplace_back("terminal_norm", path.terminal_norm());
    report->summary.emplace_back(
        "first_truncation_step",
        path.first_truncation_step ? static_cast<double>(*path.first_truncation_step)
                                   : -1.0);
    report->summary.emplace_back(
        "diverged_at",
        path.diverged_at ? static_cast<double>(*path.diverged_at) : -1.0);
    *out = report;
  });
}

vtem_status vtem_run_converge(const vtem_model* model, const double* dt_list,
                              int dt_count, double dt_ref, double horizon,
                              double q, int64_t paths, uint64_t seed,
                              int workers, int with_u_metric,
                              vtem_report** out) {
  if (!model || !dt_list || dt_count <= 0 || !out) {
    set_error("null or empty argument");
    return VTEM_ERR_CONFIG;
  }
  return guarded([&] {
    const std::vector<double> dts(dt_list, dt_list + dt_count);
    const vtem::ErrorReport result = vtem::estimate_strong_error(
        model->bundle, q, dts, dt_ref, horizon, paths, seed, workers,
        with_u_metric != 0);
    auto* report = new vtem_report;
    report->table = vtem::error_report_csv(result);
    report->summary.emplace_back("slope", result.fit.slope);
    report->summary.emplace_back("intercept", result.fit.intercept);
    report->summary.emplace_back("fit_points", result.fit.points);
    report->summary.emplace_back("fit_valid", result.fit.valid ? 1.0 : 0.0);
    *out = report;
  });
}

vtem_status vtem_run_moments(const vtem_model* model, double rho,
                             const double* dt_list, int dt_count,
                             double horizon, int64_t paths, uint64_t seed,
                             int workers, vtem_report** out) {
  if (!model || !dt_list || dt_count <= 0 || !out) {
    set_error("null or empty argument");
    return VTEM_ERR_CONFIG;
  }
  return guarded([&] {
    const std::vector<double> dts(dt_list, dt_list + dt_count);
    const vtem::MomentReport result = vtem::estimate_moment_sup(
        model->bundle, rho, dts, horizon, paths, seed, workers);
    auto* report = new vtem_report;
    report->table = vtem::moment_report_csv(result);
    double worst = 0.0;
    for (const vtem::MomentRow& row : result.rows) {
      worst = std::max(worst, row.sup_moment);
    }
    report->summary.emplace_back("max_sup_moment", worst);
    *out = report;
  });
}

vtem_status vtem_run_stability(const vtem_model* model, double dt,
                               double horizon, int64_t paths, uint64_t seed,
                               double threshold, int workers,
                               vtem_report** out) {
  if (!model || !out) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  return guarded([&] {
    const vtem::StabilityReport result = vtem::stability_experiment(
        model->bundle, dt, horizon, paths, seed, threshold, workers);
    auto* report = new vtem_report;
    report->table = vtem::stability_report_csv(result);
    report->summary.emplace_back("fraction_converged", result.fraction_converged);
    report->summary.emplace_back("fraction_below_radius", result.fraction_below_radius);
    report->summary.emplace_back("divergence_fraction", result.divergence_fraction);
    report->summary.emplace_back("median_lyap_slope", result.median_lyap_slope);
    report->summary.emplace_back("lyap_slope_stderr", result.lyap_slope_stderr);
    report->summary.emplace_back("mean_moment_slope", result.mean_moment_slope);
    report->summary.emplace_back("radius", result.radius);
    report->summary.emplace_back("threshold", result.threshold);
    *out = report;
  });
}

int32_t vtem_report_columns(const vtem_report* report) {
  return report ? static_cast<int32_t>(report->table.columns.size()) : 0;
}

const char* vtem_report_column_name(const vtem_report* report, int32_t col) {
  if (!report || col < 0 ||
      col >= static_cast<int32_t>(report->table.columns.size())) {
    return nullptr;
  }
  return report->table.columns[static_cast<std::size_t>(col)].c_str();
}

int64_t vtem_report_rows(const vtem_report* report) {
  return report ? static_cast<int64_t>(report->table.rows.size()) : 0;
}

vtem_status vtem_report_value(const vtem_report* report, int64_t row,
                              int32_t col, double* out) {
  if (!report || !out || row < 0 ||
      row >= static_cast<int64_t>(report->table.rows.size()) || col < 0 ||
      col >= static_cast<int32_t>(report->table.columns.size())) {
    set_error("report index out of range");
    return VTEM_ERR_CONFIG;
  }
  *out = report->table.rows[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
  return VTEM_OK;
}

int32_t vtem_report_summary_count(const vtem_report* report) {
  return report ? static_cast<int32_t>(report->summary.size()) : 0;
}

const char* vtem_report_summary_name(const vtem_report* report, int32_t index) {
  if (!report || index < 0 ||
      index >= static_cast<int32_t>(report->summary.size())) {
    return nullptr;
  }
  return report->summary[static_cast<std::size_t>(index)].first.c_str();
}

vtem_status vtem_report_summary_value(const vtem_report* report,
                                      const char* name, double* out) {
  if (!report || !name || !out) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  for (const auto& [key, value] : report->summary) {
    if (key == name) {
      *out = value;
      return VTEM_OK;
    }
  }
  set_error(std::string("no summary value named '") + name + "'");
  return VTEM_ERR_CONFIG;
}

vtem_status vtem_report_write_csv(const vtem_report* report, const char* path) {
  if (!report || !path) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  return guarded([&] { report->table.write(path); });
}

vtem_status vtem_report_csv_string(const vtem_report* report, char** out) {
  if (!report || !out) {
    set_error("null argument");
    return VTEM_ERR_CONFIG;
  }
  return guarded([&] { *out = dup_string(report->table.to_string()); });
}

void vtem_report_close(vtem_report* report) { delete report; }

}  // extern "C"
