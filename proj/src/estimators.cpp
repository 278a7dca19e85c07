#include "vtem/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace vtem {

namespace {

// Runs job(p) for p in [0, count) across the requested workers and keeps
// the first exception. Results must be written into per-index slots by the
// job itself; reductions happen afterwards in index order.
void parallel_for(std::int64_t count, int workers,
                  const std::function<void(std::int64_t)>& job) {
  workers = std::max(1, workers);
  if (workers == 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&]() {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double sample_stderr(double sum, double sum_sq, std::int64_t n) {
  if (n < 2) return 0.0;
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean) *
                     (static_cast<double>(n) / (n - 1));
  return std::sqrt(var / n);
}

double least_squares_slope(const std::vector<double>& t,
                           const std::vector<double>& y) {
  const std::size_t n = t.size();
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  const double denom = n * stt - st * st;
  if (denom == 0.0) return 0.0;
  return (n * sty - st * sy) / denom;
}

}  // namespace

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  if (const char* env = std::getenv("VTEM_WORKERS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  LogLogFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  fit.points = static_cast<int>(lx.size());
  if (fit.points < 3) return fit;
  const double slope = least_squares_slope(lx, ly);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= fit.points;
  my /= fit.points;
  fit.slope = slope;
  fit.intercept = my - slope * mx;
  fit.valid = true;
  return fit;
}

MomentReport estimate_moment_sup(const ModelBundle& bundle, double rho,
                                 const std::vector<double>& dt_list, double T,
                                 std::int64_t paths, std::uint64_t seed,
                                 int workers) {
  if (paths < 2) throw ConfigError("estimate_moment_sup: need at least 2 paths");
  workers = resolve_workers(workers);
  MomentReport report;
  report.rho = rho;
  for (double dt : dt_list) {
    const std::int64_t n = std::llround(T / dt);
    std::vector<std::vector<double>> per_path(static_cast<std::size_t>(paths));
    parallel_for(paths, workers, [&](std::int64_t p) {
      const BrownianGrid grid =
          brownian_grid(seed, p, T, dt, bundle.system.noise_dim);
      SchemeConfig config;
      config.kind = SchemeKind::TruncatedEm;
      config.dt = dt;
      config.horizon = T;
      config.x0 = bundle.x0;
      config.store_states = false;
      config.store_pre = false;
      PathResult path =
          simulate(config, &bundle.policy, bundle.system, bundle.spec, grid);
      std::vector<double> vr(path.v_values.size());
      for (std::size_t k = 0; k < vr.size(); ++k) {
        const double value = std::pow(path.v_values[k], rho);
        if (!std::isfinite(value)) {
          throw NumericFailure("estimate_moment_sup: non-finite V^rho on path " +
                               std::to_string(p));
        }
        vr[k] = value;
      }
      per_path[static_cast<std::size_t>(p)] = std::move(vr);
    });
    // Ordered reduction over paths, then sup over steps.
    std::vector<double> sum(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> sum_sq(static_cast<std::size_t>(n) + 1, 0.0);
    for (std::int64_t p = 0; p < paths; ++p) {
      const std::vector<double>& vr = per_path[static_cast<std::size_t>(p)];
      for (std::size_t k = 0; k < vr.size(); ++k) {
        sum[k] += vr[k];
        sum_sq[k] += vr[k] * vr[k];
      }
    }
    MomentRow row;
    row.dt = dt;
    row.paths = paths;
    for (std::size_t k = 0; k < sum.size(); ++k) {
      const double mean = sum[k] / paths;
      if (mean > row.sup_moment) {
        row.sup_moment = mean;
        row.argmax_step = static_cast<std::int64_t>(k);
      }
    }
    row.stderr_sup = sample_stderr(sum[static_cast<std::size_t>(row.argmax_step)],
                                   sum_sq[static_cast<std::size_t>(row.argmax_step)],
                                   paths);
    report.rows.push_back(row);
  }
  return report;
}

ErrorReport estimate_strong_error(const ModelBundle& bundle, double q,
                                  const std::vector<double>& dt_list,
                                  double dt_ref, double T, std::int64_t paths,
                                  std::uint64_t seed, int workers,
                                  bool with_u_metric) {
  if (!(q > 0.0)) throw ConfigError("estimate_strong_error: q must be positive");
  if (!(dt_ref > 0.0)) throw ConfigError("estimate_strong_error: dt_ref must be positive");
  workers = resolve_workers(workers);
  std::vector<double> dts = dt_list;
  std::sort(dts.begin(), dts.end(), std::greater<double>());
  std::vector<std::int64_t> factors;
  for (double dt : dts) {
    const double ratio = dt / dt_ref;
    const std::int64_t r = std::llround(ratio);
    if (r <= 0 || std::abs(ratio - r) > 1e-9) {
      std::ostringstream os;
      os << "estimate_strong_error: dt_ref " << dt_ref << " does not divide dt " << dt;
      throw ConfigError(os.str());
    }
    factors.push_back(r);
  }
  const bool u_metric = with_u_metric && bundle.rate.has_value();
  const std::size_t levels = dts.size();
  struct PathErrors {
    std::vector<double> err;
    std::vector<double> u_err;
  };
  std::vector<PathErrors> per_path(static_cast<std::size_t>(paths));

  parallel_for(paths, workers, [&](std::int64_t p) {
    const BrownianGrid fine =
        brownian_grid(seed, p, T, dt_ref, bundle.system.noise_dim);
    SchemeConfig config;
    config.kind = SchemeKind::TruncatedEm;
    config.dt = dt_ref;
    config.horizon = T;
    config.x0 = bundle.x0;
    config.store_states = false;
    config.store_pre = false;
    const PathResult ref =
        simulate(config, &bundle.policy, bundle.system, bundle.spec, fine);
    PathErrors errors;
    errors.err.resize(levels);
    if (u_metric) errors.u_err.resize(levels);
    for (std::size_t level = 0; level < levels; ++level) {
      const BrownianGrid coarse_grid = coarsen(fine, factors[level]);
      SchemeConfig coarse_config = config;
      coarse_config.dt = dts[level];
      const PathResult coarse = simulate(coarse_config, &bundle.policy,
                                         bundle.system, bundle.spec, coarse_grid);
      const Vector diff = ref.terminal - coarse.terminal;
      errors.err[level] = std::pow(diff.norm(), q);
      if (u_metric) {
        // Ybar(T) coincides with Y(T) at the shared grid point.
        errors.u_err[level] = bundle.rate->metric_u(diff);
      }
    }
    per_path[static_cast<std::size_t>(p)] = std::move(errors);
  });

  ErrorReport report;
  report.q = q;
  report.dt_ref = dt_ref;
  std::vector<double> mean_for_fit;
  for (std::size_t level = 0; level < levels; ++level) {
    double sum = 0, sum_sq = 0, u_sum = 0;
    for (std::int64_t p = 0; p < paths; ++p) {
      const double e = per_path[static_cast<std::size_t>(p)].err[level];
      sum += e;
      sum_sq += e * e;
      if (u_metric) u_sum += per_path[static_cast<std::size_t>(p)].u_err[level];
    }
    ErrorRow row;
    row.dt = dts[level];
    row.mean_error = sum / paths;
    row.stderr_error = sample_stderr(sum, sum_sq, paths);
    row.paths = paths;
    row.q = q;
    if (u_metric) row.u_mean = u_sum / paths;
    report.rows.push_back(row);
    mean_for_fit.push_back(row.mean_error);
  }
  report.fit = fit_loglog(dts, mean_for_fit);
  return report;
}

LyapunovSlopes estimate_lyapunov(const std::vector<std::vector<double>>& v_series,
                                 double rho, double dt,
                                 double burn_in_fraction) {
  if (v_series.empty()) throw ConfigError("estimate_lyapunov: no paths");
  if (burn_in_fraction < 0.0 || burn_in_fraction > 0.9) {
    throw ConfigError("estimate_lyapunov: burn_in_fraction outside [0, 0.9]");
  }
  LyapunovSlopes out;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::size_t max_len = 0;
  for (const auto& v : v_series) max_len = std::max(max_len, v.size());
  const std::size_t start =
      static_cast<std::size_t>(std::ceil(burn_in_fraction * (max_len - 1)));

  bool any_alive_at_start = false;
  for (const auto& v : v_series) {
    std::vector<double> ts, logs;
    for (std::size_t k = start; k < v.size(); ++k) {
      if (v[k] > 0.0 && std::isfinite(v[k])) {
        ts.push_back(static_cast<double>(k) * dt);
        logs.push_back(std::log(v[k]));
      }
    }
    if (ts.size() < 2) {
      out.pathwise.push_back(neg_inf);  // absorbed path
    } else {
      out.pathwise.push_back(least_squares_slope(ts, logs));
      any_alive_at_start = true;
    }
  }
  // Mean-moment slope from the across-path mean of V^rho.
  std::vector<double> ts, logs;
  for (std::size_t k = start; k < max_len; ++k) {
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& v : v_series) {
      if (k < v.size() && std::isfinite(v[k])) {
        sum += std::pow(v[k], rho);
        ++n;
      }
    }
    if (n > 0 && sum > 0.0) {
      ts.push_back(static_cast<double>(k) * dt);
      logs.push_back(std::log(sum / n));
    }
  }
  if (!any_alive_at_start && ts.empty()) {
    throw DegenerateInput("estimate_lyapunov: every path absorbed from the start");
  }
  out.mean_moment_slope = ts.size() >= 2 ? least_squares_slope(ts, logs) : neg_inf;
  return out;
}

double distance_to_kernel(const DecayFunction& decay, const Vector& x) {
  if (decay.kernel_is_origin) return x.norm();
  if (decay.distance) return decay.distance(x);
  throw ConfigError("distance_to_kernel: no kernel descriptor or distance callable");
}

StabilityReport stability_experiment(const ModelBundle& bundle, double dt,
                                     double T, std::int64_t paths,
                                     std::uint64_t seed, double threshold,
                                     int workers, double burn_in_fraction) {
  if (paths < 1) throw ConfigError("stability_experiment: need at least 1 path");
  workers = resolve_workers(workers);
  const double radius = truncation_radius(bundle.policy, dt);

  struct PerPath {
    StabilityPathRow truncated;
    StabilityPathRow classical;
    std::vector<double> v_series;
    bool within_radius = true;
  };
  std::vector<PerPath> results(static_cast<std::size_t>(paths));

  parallel_for(paths, workers, [&](std::int64_t p) {
    const BrownianGrid grid =
        brownian_grid(seed, p, T, dt, bundle.system.noise_dim);
    SchemeConfig config;
    config.dt = dt;
    config.horizon = T;
    config.x0 = bundle.x0;
    config.store_states = false;
    config.store_pre = false;

    PerPath result;

    config.kind = SchemeKind::TruncatedEm;
    PathResult z =
        simulate(config, &bundle.policy, bundle.system, bundle.spec, grid);
    StabilityPathRow& row = result.truncated;
    row.scheme = 0;
    row.path_id = p;
    row.terminal_norm = z.terminal_norm();
    row.kernel_distance = distance_to_kernel(bundle.decay, z.terminal);
    row.first_truncation_step =
        z.first_truncation_step ? *z.first_truncation_step : -1;
    for (std::size_t k = 1; k < z.v_values.size(); ++k) {
      row.max_vrho =
          std::max(row.max_vrho, std::pow(z.v_values[k], bundle.spec.rho));
    }
    row.max_vrho = std::max(row.max_vrho, std::pow(z.v_values[0], bundle.spec.rho));
    result.v_series = z.v_values;

    config.kind = SchemeKind::ClassicalEm;
    PathResult c = simulate(config, nullptr, bundle.system, bundle.spec, grid);
    StabilityPathRow& crow = result.classical;
    crow.scheme = 1;
    crow.path_id = p;
    crow.diverged = c.diverged_at ? 1 : 0;
    crow.terminal_norm = c.terminal_norm();
    crow.kernel_distance = crow.diverged
                               ? std::numeric_limits<double>::infinity()
                               : distance_to_kernel(bundle.decay, c.terminal);
    crow.first_truncation_step = -1;
    for (double v : c.v_values) {
      if (std::isfinite(v)) {
        crow.max_vrho = std::max(crow.max_vrho, std::pow(v, bundle.spec.rho));
      } else {
        crow.max_vrho = std::numeric_limits<double>::infinity();
      }
    }
    results[static_cast<std::size_t>(p)] = std::move(result);
  });

  // Deterministic ordered reduction.
  std::vector<std::vector<double>> v_series;
  v_series.reserve(static_cast<std::size_t>(paths));
  for (auto& r : results) v_series.push_back(std::move(r.v_series));
  LyapunovSlopes slopes;
  try {
    slopes = estimate_lyapunov(v_series, bundle.spec.rho, dt, burn_in_fraction);
  } catch (const DegenerateInput&) {
    // Every path absorbed (e.g. started at the equilibrium): sentinel slopes.
    slopes.pathwise.assign(static_cast<std::size_t>(paths),
                           -std::numeric_limits<double>::infinity());
    slopes.mean_moment_slope = -std::numeric_limits<double>::infinity();
  }

  StabilityReport report;
  report.radius = radius;
  report.threshold = threshold;
  std::int64_t converged = 0, diverged = 0, bounded = 0;
  for (std::int64_t p = 0; p < paths; ++p) {
    PerPath& r = results[static_cast<std::size_t>(p)];
    r.truncated.lyap_slope = slopes.pathwise[static_cast<std::size_t>(p)];
    r.classical.lyap_slope = 0.0;
    if (r.truncated.kernel_distance < threshold) ++converged;
    if (r.classical.diverged) ++diverged;
    if (r.truncated.terminal_norm <= radius + 1e-12 * std::max(1.0, radius)) ++bounded;
    report.rows.push_back(r.truncated);
  }
  for (std::int64_t p = 0; p < paths; ++p) {
    report.rows.push_back(results[static_cast<std::size_t>(p)].classical);
  }
  report.fraction_converged = static_cast<double>(converged) / paths;
  report.divergence_fraction = static_cast<double>(diverged) / paths;
  report.fraction_below_radius = static_cast<double>(bounded) / paths;
  report.mean_moment_slope = slopes.mean_moment_slope;

  std::vector<double> finite_slopes;
  for (double s : slopes.pathwise) {
    if (std::isfinite(s)) finite_slopes.push_back(s);
  }
  if (!finite_slopes.empty()) {
    std::sort(finite_slopes.begin(), finite_slopes.end());
    const std::size_t n = finite_slopes.size();
    report.median_lyap_slope = (n % 2 == 1)
                                   ? finite_slopes[n / 2]
                                   : 0.5 * (finite_slopes[n / 2 - 1] + finite_slopes[n / 2]);
    double sum = 0, sum_sq = 0;
    for (double s : finite_slopes) {
      sum += s;
      sum_sq += s * s;
    }
    report.lyap_slope_stderr =
        sample_stderr(sum, sum_sq, static_cast<std::int64_t>(n));
  } else {
    report.median_lyap_slope = -std::numeric_limits<double>::infinity();
  }
  return report;
}

}  // namespace vtem
