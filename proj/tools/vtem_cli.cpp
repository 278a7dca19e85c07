// Command-line front end for the V-truncated Euler-Maruyama library.
// Links against the C API only.

#include "vtem/vtem.h"

#include "CLI11.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

int exit_code_for(vtem_status status) {
  switch (status) {
    case VTEM_OK:
      return kExitOk;
    case VTEM_ERR_VALIDATION:
      return kExitValidation;
    case VTEM_ERR_NUMERIC:
      return kExitNumeric;
    default:
      return kExitConfig;
  }
}

struct CliError {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) {
  throw CliError{code, message};
}

[[noreturn]] void fail_status(vtem_status status, const std::string& what) {
  fail(exit_code_for(status), what + ": " + vtem_last_error());
}

// ---------------------------------------------------------------------------
// Configuration files: `key = value` lines with optional [section] headers,
// where a section name matches a command and applies only to it. Flags given
// on the command line override file values. Duplicate keys in the same
// section are rejected with both line numbers.

struct ConfigEntry {
  std::string value;
  int line;
};

struct ConfigFile {
  // section ("" for global) -> key -> entry
  std::map<std::string, std::map<std::string, ConfigEntry>> sections;
};

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

ConfigFile load_config_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) fail(kExitConfig, "cannot open config file '" + path + "'");
  ConfigFile config;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        fail(kExitConfig, path + ":" + std::to_string(line_no) +
                              ": unterminated section header");
      }
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      fail(kExitConfig,
           path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) {
      fail(kExitConfig, path + ":" + std::to_string(line_no) + ": empty key");
    }
    auto [it, inserted] =
        config.sections[section].emplace(key, ConfigEntry{value, line_no});
    if (!inserted) {
      fail(kExitConfig, path + ": duplicate key '" + key + "' at lines " +
                            std::to_string(it->second.line) + " and " +
                            std::to_string(line_no));
    }
  }
  return config;
}

// Effective file values for a command: global keys overlaid by the section.
std::map<std::string, std::string> config_for_command(const ConfigFile& config,
                                                      const std::string& command) {
  std::map<std::string, std::string> out;
  if (auto it = config.sections.find(""); it != config.sections.end()) {
    for (const auto& [key, entry] : it->second) out[key] = entry.value;
  }
  if (auto it = config.sections.find(command); it != config.sections.end()) {
    for (const auto& [key, entry] : it->second) out[key] = entry.value;
  }
  return out;
}

// ---------------------------------------------------------------------------
// dt-list grammar: comma-separated items, each a number, a power token
// 2^-k, or a halving range 2^-a..2^-b.

double parse_dt_token(const std::string& token) {
  const std::string s = trim(token);
  if (s.rfind("2^", 0) == 0) {
    try {
      return std::pow(2.0, std::stod(s.substr(2)));
    } catch (const std::exception&) {
      fail(kExitConfig, "bad dt token '" + s + "'");
    }
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (!trim(s.substr(used)).empty()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(kExitConfig, "bad dt token '" + s + "'");
  }
}

std::vector<double> parse_dt_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const std::size_t dots = item.find("..");
    if (dots != std::string::npos) {
      const double from = parse_dt_token(item.substr(0, dots));
      const double to = parse_dt_token(item.substr(dots + 2));
      if (!(from > 0.0) || !(to > 0.0)) fail(kExitConfig, "dt range must be positive");
      double hi = std::max(from, to), lo = std::min(from, to);
      for (double dt = hi; dt >= lo * (1.0 - 1e-12); dt *= 0.5) out.push_back(dt);
    } else {
      out.push_back(parse_dt_token(item));
    }
  }
  if (out.empty()) fail(kExitConfig, "empty dt list");
  return out;
}

std::vector<double> parse_x0(const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(kExitConfig, "bad x0 entry '" + item + "'");
    }
  }
  if (out.empty()) fail(kExitConfig, "empty x0");
  return out;
}

// ---------------------------------------------------------------------------

struct ModelHandle {
  vtem_model* model = nullptr;
  ModelHandle() = default;
  ModelHandle(const ModelHandle&) = delete;
  ModelHandle& operator=(const ModelHandle&) = delete;
  ~ModelHandle() { vtem_model_close(model); }
};

struct ReportHandle {
  vtem_report* report = nullptr;
  ReportHandle() = default;
  ReportHandle(const ReportHandle&) = delete;
  ReportHandle& operator=(const ReportHandle&) = delete;
  ~ReportHandle() { vtem_report_close(report); }
};

struct CommonOptions {
  std::string model;
  std::string x0_text;
  double rho = std::numeric_limits<double>::quiet_NaN();
  double delta_star = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out_path;
};

void open_model(const CommonOptions& options, ModelHandle& handle) {
  if (options.model.empty()) fail(kExitConfig, "no model selected (--model)");
  vtem_status status;
  if (std::filesystem::exists(options.model) &&
      std::filesystem::is_regular_file(options.model)) {
    std::ifstream file(options.model);
    std::stringstream text;
    text << file.rdbuf();
    status = vtem_model_parse(text.str().c_str(), &handle.model);
    if (status != VTEM_OK) fail_status(status, "model description rejected");
    if (!options.x0_text.empty() || !std::isnan(options.rho) ||
        !std::isnan(options.delta_star)) {
      fail(kExitConfig,
           "overrides (--x0/--rho/--delta-star) apply to built-in models; set "
           "them in the description file instead");
    }
    return;
  }
  std::optional<std::vector<double>> x0;
  if (!options.x0_text.empty()) x0 = parse_x0(options.x0_text);
  status = vtem_model_open_custom(
      options.model.c_str(), options.rho, x0 ? x0->data() : nullptr,
      x0 ? static_cast<int>(x0->size()) : 0, options.delta_star, &handle.model);
  if (status != VTEM_OK) fail_status(status, "cannot open model");
}

void write_report(const ReportHandle& handle, const std::string& out_path) {
  if (out_path.empty()) return;
  const vtem_status status = vtem_report_write_csv(handle.report, out_path.c_str());
  if (status != VTEM_OK) fail_status(status, "cannot write output");
  std::cout << "wrote " << out_path << " (" << vtem_report_rows(handle.report)
            << " rows)\n";
}

double summary(const ReportHandle& handle, const char* name) {
  double value = 0.0;
  const vtem_status status =
      vtem_report_summary_value(handle.report, name, &value);
  if (status != VTEM_OK) fail_status(status, "missing summary value");
  return value;
}

void print_table(const ReportHandle& handle) {
  char* text = nullptr;
  if (vtem_report_csv_string(handle.report, &text) == VTEM_OK) {
    std::cout << text;
    vtem_string_free(text);
  }
}

int default_workers() {
  if (const char* env = std::getenv("VTEM_WORKERS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  return 0;  // library default
}

// ---------------------------------------------------------------------------
// Commands.

int run_list_models() {
  const int count = vtem_model_count();
  for (int i = 0; i < count; ++i) {
    ModelHandle handle;
    const char* name = vtem_model_name(i);
    if (vtem_model_open(name, &handle.model) != VTEM_OK) {
      fail(kExitNumeric, std::string("built-in model '") + name + "' failed to load");
    }
    int d = 0, m = 0;
    double ds = 0.0;
    vtem_model_state_dim(handle.model, &d);
    vtem_model_noise_dim(handle.model, &m);
    vtem_model_delta_star(handle.model, &ds);
    std::printf("%-16s d=%d m=%d delta_star=%g\n", name, d, m, ds);
  }
  return kExitOk;
}

int run_validate(const CommonOptions& options) {
  ModelHandle handle;
  open_model(options, handle);
  int passed = 0;
  char* text = nullptr;
  const vtem_status status = vtem_model_validate(handle.model, &passed, &text);
  if (status != VTEM_OK) fail_status(status, "validation run failed");
  if (text) {
    std::cout << text << "\n";
    vtem_string_free(text);
  }
  return passed ? kExitOk : kExitValidation;
}

int run_simulate(const CommonOptions& options, const std::string& scheme,
                 double dt, double horizon, std::int64_t path_id) {
  // --x0 sets the initial state of this run only; the model keeps its
  // registered default, so an excursion start does not have to satisfy the
  // policy feasibility inequality (relevant for classical comparisons).
  CommonOptions model_options = options;
  model_options.x0_text.clear();
  ModelHandle handle;
  open_model(model_options, handle);
  std::optional<std::vector<double>> x0;
  if (!options.x0_text.empty()) x0 = parse_x0(options.x0_text);
  int scheme_id;
  if (scheme == "truncated") {
    scheme_id = 0;
  } else if (scheme == "classical") {
    scheme_id = 1;
  } else {
    fail(kExitConfig, "unknown scheme '" + scheme + "' (truncated|classical)");
  }
  ReportHandle report;
  const vtem_status status = vtem_run_path(
      handle.model, scheme_id, dt, horizon, x0 ? x0->data() : nullptr,
      x0 ? static_cast<int>(x0->size()) : 0, options.seed, path_id,
      &report.report);
  if (status != VTEM_OK) fail_status(status, "simulation failed");
  write_report(report, options.out_path);
  std::cout << "steps " << static_cast<std::int64_t>(summary(report, "steps"))
            << ", terminal |y| " << summary(report, "terminal_norm");
  const double first = summary(report, "first_truncation_step");
  if (first >= 0) {
    std::cout << ", first truncation at step " << static_cast<std::int64_t>(first);
  }
  const double diverged = summary(report, "diverged_at");
  if (diverged >= 0) {
    std::cout << ", diverged at step " << static_cast<std::int64_t>(diverged);
  }
  std::cout << "\n";
  return kExitOk;
}

int run_converge(const CommonOptions& options, const std::string& dt_list,
                 const std::string& dt_ref, double horizon, std::int64_t paths,
                 double q, bool u_metric) {
  ModelHandle handle;
  open_model(options, handle);
  const std::vector<double> dts = parse_dt_list(dt_list);
  if (dt_ref.empty()) fail(kExitConfig, "converge requires --dt-ref");
  const double ref = parse_dt_token(dt_ref);
  ReportHandle report;
  const vtem_status status = vtem_run_converge(
      handle.model, dts.data(), static_cast<int>(dts.size()), ref, horizon, q,
      paths, options.seed, options.workers, u_metric ? 1 : 0, &report.report);
  if (status != VTEM_OK) fail_status(status, "convergence study failed");
  print_table(report);
  write_report(report, options.out_path);
  if (summary(report, "fit_valid") > 0) {
    std::cout << "fitted slope " << summary(report, "slope") << " (intercept "
              << summary(report, "intercept") << ", "
              << static_cast<int>(summary(report, "fit_points")) << " points)\n";
  } else {
    std::cout << "fitted slope unavailable (need >= 3 positive rows)\n";
  }
  return kExitOk;
}

int run_moments(const CommonOptions& options, const std::string& dt_list,
                double horizon, std::int64_t paths, double rho) {
  ModelHandle handle;
  open_model(options, handle);
  const std::vector<double> dts = parse_dt_list(dt_list);
  ReportHandle report;
  const vtem_status status =
      vtem_run_moments(handle.model, rho, dts.data(), static_cast<int>(dts.size()),
                       horizon, paths, options.seed, options.workers, &report.report);
  if (status != VTEM_OK) fail_status(status, "moment study failed");
  print_table(report);
  write_report(report, options.out_path);
  std::cout << "largest sup-moment " << summary(report, "max_sup_moment") << "\n";
  return kExitOk;
}

int run_stability(const CommonOptions& options, double dt, double horizon,
                  std::int64_t paths, double threshold) {
  ModelHandle handle;
  open_model(options, handle);
  ReportHandle report;
  const vtem_status status =
      vtem_run_stability(handle.model, dt, horizon, paths, options.seed,
                         threshold, options.workers, &report.report);
  if (status != VTEM_OK) fail_status(status, "stability run failed");
  write_report(report, options.out_path);
  std::cout << "radius " << summary(report, "radius") << "\n"
            << "truncated: " << 100.0 * summary(report, "fraction_below_radius")
            << "% within radius, " << 100.0 * summary(report, "fraction_converged")
            << "% with d(Z(T), Ker w) < " << summary(report, "threshold") << "\n"
            << "classical: " << 100.0 * summary(report, "divergence_fraction")
            << "% diverged\n"
            << "median pathwise log-V slope " << summary(report, "median_lyap_slope")
            << " (stderr " << summary(report, "lyap_slope_stderr") << ")\n"
            << "mean-moment slope " << summary(report, "mean_moment_slope") << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

const std::vector<std::string> kCommands = {"list-models", "validate", "simulate",
                                            "converge",    "stability", "moments"};

// Rebuilds argv with config-file values injected ahead of explicit flags;
// every option takes the last occurrence, so the command line wins.
std::vector<std::string> assemble_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) fail(kExitConfig, "--config needs a file path");
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config_path.empty()) return args;

  const ConfigFile config = load_config_file(config_path);
  std::string command;
  std::size_t command_pos = args.size();
  for (std::size_t i = 0; i < args.size() && command.empty(); ++i) {
    for (const std::string& c : kCommands) {
      if (args[i] == c) {
        command = c;
        command_pos = i;
        break;
      }
    }
  }
  std::vector<std::string> out;
  if (command.empty()) {
    std::map<std::string, std::string> globals = config_for_command(config, "");
    const auto it = globals.find("command");
    if (it == globals.end()) return args;
    command = it->second;
    std::map<std::string, std::string> values = config_for_command(config, command);
    values.erase("command");
    out.push_back(command);
    for (const auto& [key, value] : values) {
      out.push_back("--" + key + "=" + value);
    }
    out.insert(out.end(), args.begin(), args.end());
    return out;
  }
  std::map<std::string, std::string> values = config_for_command(config, command);
  values.erase("command");
  out.assign(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(command_pos) + 1);
  for (const auto& [key, value] : values) {
    out.push_back("--" + key + "=" + value);
  }
  out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(command_pos) + 1,
             args.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    CLI::App app{"V-truncated Euler-Maruyama schemes for nonlinear SDEs"};
    app.set_version_flag("--version", vtem_version());
    app.require_subcommand(1);

    CommonOptions options;
    options.workers = default_workers();

    auto add_common = [&](CLI::App* cmd, bool with_out = true) {
      cmd->add_option("--model", options.model,
                      "built-in model name or description file path")
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      cmd->add_option("--x0", options.x0_text, "initial state override (comma list)")
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      cmd->add_option("--rho", options.rho, "moment exponent override (scalar-cubic)")
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      cmd->add_option("--delta-star", options.delta_star,
                      "largest admissible step override")
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      cmd->add_option("--seed", options.seed, "random seed")
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      cmd->add_option("--workers", options.workers,
                      "worker threads (default: VTEM_WORKERS or hardware)")
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      if (with_out) {
        cmd->add_option("--out", options.out_path, "output CSV path")
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      }
    };

    CLI::App* list_cmd = app.add_subcommand("list-models", "list built-in models");

    CLI::App* validate_cmd =
        app.add_subcommand("validate", "run every model validator");
    add_common(validate_cmd, false);

    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "simulate one path and emit CSV");
    std::string scheme = "truncated";
    double sim_dt = 1e-3, sim_T = 1.0;
    std::int64_t sim_path_id = 0;
    add_common(simulate_cmd);
    simulate_cmd->add_option("--scheme", scheme, "truncated|classical")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    simulate_cmd->add_option("--dt", sim_dt, "step size")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    simulate_cmd->add_option("--T", sim_T, "horizon")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    simulate_cmd->add_option("--path-id", sim_path_id, "path index in the stream")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    CLI::App* converge_cmd = app.add_subcommand(
        "converge", "coupled strong-error study with log-log slope");
    std::string dt_list, dt_ref;
    double conv_T = 1.0, conv_q = 1.0;
    std::int64_t conv_paths = 1000;
    bool u_metric = false;
    add_common(converge_cmd);
    converge_cmd
        ->add_option("--dt-list", dt_list, "e.g. 2^-6..2^-12 or 0.01,0.005")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    converge_cmd->add_option("--dt-ref", dt_ref, "reference step, must divide each dt")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    converge_cmd->add_option("--T", conv_T, "horizon")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    converge_cmd->add_option("--paths", conv_paths, "Monte Carlo paths")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    converge_cmd->add_option("--q", conv_q, "error moment order")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    converge_cmd->add_flag("--u-metric", u_metric,
                           "also report the auxiliary U metric when available");

    CLI::App* stability_cmd = app.add_subcommand(
        "stability", "paired truncated/classical stability experiment");
    double stab_dt = 0.005, stab_T = 10.0, threshold = 1.0;
    std::int64_t stab_paths = 100;
    add_common(stability_cmd);
    stability_cmd->add_option("--dt", stab_dt, "step size")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    stability_cmd->add_option("--T", stab_T, "horizon")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    stability_cmd->add_option("--paths", stab_paths, "paths per scheme")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    stability_cmd->add_option("--threshold", threshold, "terminal distance threshold")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    CLI::App* moments_cmd =
        app.add_subcommand("moments", "sup_k mean V^rho(Y_k) per step size");
    std::string moment_dts;
    double mom_T = 1.0, mom_rho = 0.5;
    std::int64_t mom_paths = 2000;
    add_common(moments_cmd);
    moments_cmd->add_option("--dt-list", moment_dts, "step sizes")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    moments_cmd->add_option("--T", mom_T, "horizon")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    moments_cmd->add_option("--paths", mom_paths, "Monte Carlo paths")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    moments_cmd->add_option("--moment-rho", mom_rho, "moment exponent")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    const std::vector<std::string> args = assemble_args(argc, argv);
    std::vector<const char*> argv_eff;
    argv_eff.push_back(argc > 0 ? argv[0] : "vtem");
    for (const std::string& a : args) argv_eff.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv_eff.size()), argv_eff.data());
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e);
      return rc == 0 ? kExitOk : kExitConfig;
    }

    if (list_cmd->parsed()) return run_list_models();
    if (validate_cmd->parsed()) return run_validate(options);
    if (simulate_cmd->parsed()) {
      return run_simulate(options, scheme, sim_dt, sim_T, sim_path_id);
    }
    if (converge_cmd->parsed()) {
      if (dt_list.empty()) fail(kExitConfig, "converge requires --dt-list");
      return run_converge(options, dt_list, dt_ref, conv_T, conv_paths, conv_q,
                          u_metric);
    }
    if (stability_cmd->parsed()) {
      return run_stability(options, stab_dt, stab_T, stab_paths, threshold);
    }
    if (moments_cmd->parsed()) {
      if (moment_dts.empty()) fail(kExitConfig, "moments requires --dt-list");
      return run_moments(options, moment_dts, mom_T, mom_paths, mom_rho);
    }
    return kExitConfig;
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
