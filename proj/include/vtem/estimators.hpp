#pragma once

#include "vtem/models.hpp"
#include "vtem/scheme.hpp"
#include "vtem/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vtem {

// Least-squares slope/intercept of log(y) against log(x), ignoring
// nonpositive entries. Requires >= 3 usable points for a slope.
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
  bool valid = false;
};
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct ErrorRow {
  double dt = 0.0;
  double mean_error = 0.0;
  double stderr_error = 0.0;
  std::int64_t paths = 0;
  double q = 1.0;
  // Mean U(Ybar(T) - X_ref(T)) when a rate assumption is supplied.
  std::optional<double> u_mean;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;  // sorted by dt descending
  LogLogFit fit;
  double q = 1.0;
  double dt_ref = 0.0;
};

struct MomentRow {
  double dt = 0.0;
  double sup_moment = 0.0;
  std::int64_t argmax_step = 0;
  double stderr_sup = 0.0;
  std::int64_t paths = 0;
};

struct MomentReport {
  std::vector<MomentRow> rows;
  double rho = 0.5;
};

struct StabilityPathRow {
  int scheme = 0;  // 0 truncated, 1 classical
  std::int64_t path_id = 0;
  double terminal_norm = 0.0;
  double max_vrho = 0.0;
  double lyap_slope = 0.0;
  int diverged = 0;
  std::int64_t first_truncation_step = -1;  // -1 when absent
  double kernel_distance = 0.0;
};

struct StabilityReport {
  std::vector<StabilityPathRow> rows;  // truncated paths then classical paths
  double fraction_converged = 0.0;     // truncated: d(Z(T), Ker w) < threshold
  double fraction_below_radius = 0.0;  // truncated states within the radius
  double divergence_fraction = 0.0;    // classical
  double median_lyap_slope = 0.0;      // truncated, -inf paths excluded
  double lyap_slope_stderr = 0.0;
  double mean_moment_slope = 0.0;      // slope of log mean V^rho(Z_k)
  double radius = 0.0;
  double threshold = 0.0;
};

// Workers <= 0 selects the VTEM_WORKERS environment default (hardware
// concurrency when unset). Reports are reduced in path_id order, so output
// is byte-identical for every worker count.
int resolve_workers(int workers);

// sup over 0<=k<=T/dt of the across-path mean of V^rho(Y_k), per dt.
MomentReport estimate_moment_sup(const ModelBundle& bundle, double rho,
                                 const std::vector<double>& dt_list, double T,
                                 std::int64_t paths, std::uint64_t seed,
                                 int workers = 0);

// Coupled strong-error study: the reference path runs at dt_ref and every
// coarse path consumes exact sums of the same increments. Errors are
// |X_ref(T) - Y(T)|^q averaged over paths; the slope is fit on
// (log dt, log mean).
ErrorReport estimate_strong_error(const ModelBundle& bundle, double q,
                                  const std::vector<double>& dt_list,
                                  double dt_ref, double T, std::int64_t paths,
                                  std::uint64_t seed, int workers = 0,
                                  bool with_u_metric = false);

// Pathwise least-squares slopes of log V(Z_k) over the window after
// burn_in_fraction, skipping V = 0 steps; fully absorbed paths report
// -infinity. Also the slope of log of the across-path mean of V^rho.
struct LyapunovSlopes {
  std::vector<double> pathwise;
  double mean_moment_slope = 0.0;
};
LyapunovSlopes estimate_lyapunov(const std::vector<std::vector<double>>& v_series,
                                 double rho, double dt,
                                 double burn_in_fraction = 0.2);

// M truncated paths and M classical paths on shared grids, with kernel
// distances, divergence fractions and Lyapunov slopes.
StabilityReport stability_experiment(const ModelBundle& bundle, double dt,
                                     double T, std::int64_t paths,
                                     std::uint64_t seed, double threshold,
                                     int workers = 0,
                                     double burn_in_fraction = 0.2);

// |x| when Ker(w) = {0}; otherwise the user-supplied distance callable.
double distance_to_kernel(const DecayFunction& decay, const Vector& x);

}  // namespace vtem
