#include "vtem/scheme.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace vtem {

namespace {

std::int64_t step_count(double T, double dt) {
  const std::int64_t n = std::llround(T / dt);
  if (n <= 0 || std::abs(n * dt - T) > 1e-9 * std::max(1.0, T)) {
    std::ostringstream os;
    os << "horizon " << T << " does not split into whole steps of " << dt;
    throw ConfigError(os.str());
  }
  return n;
}

bool diverged_state(const Vector& x) {
  for (int i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || std::abs(x[i]) > kDivergenceThreshold) return true;
  }
  return false;
}

}  // namespace

StepOutput step_truncated(const TruncationPolicy& policy,
                          const SdeSystem& system, const Vector& y, double dt,
                          const Vector& db) {
  StepOutput out;
  out.pre = y + system.drift(y) * dt + system.diffusion(y) * db;
  if (!all_finite(out.pre)) {
    // The growth bounds make this impossible on a truncated path; reaching
    // here means a model or scheme bug.
    throw NumericFailure("step_truncated: non-finite predictor from y = " +
                         format_state(y));
  }
  out.post = truncate(policy, dt, out.pre);
  return out;
}

Vector step_classical(const SdeSystem& system, const Vector& y, double dt,
                      const Vector& db) {
  return y + system.drift(y) * dt + system.diffusion(y) * db;
}

PathResult simulate(const SchemeConfig& config, const TruncationPolicy* policy,
                    const SdeSystem& system, const LyapunovSpec& spec,
                    const BrownianGrid& grid) {
  if (config.kind == SchemeKind::TruncatedEm && policy == nullptr) {
    throw ConfigError("simulate: truncated scheme requires a policy");
  }
  if (grid.noise_dim != system.noise_dim) {
    throw ConfigError("simulate: grid noise dimension mismatch");
  }
  if (std::abs(grid.dt_fine - config.dt) > 1e-12 * std::max(1.0, config.dt)) {
    throw ConfigError("simulate: grid step does not match config dt");
  }
  const std::int64_t n = step_count(config.horizon, config.dt);
  if (grid.steps() < n) throw ConfigError("simulate: grid shorter than horizon");
  if (config.kind == SchemeKind::TruncatedEm) {
    // Validates dt <= delta_star up front.
    (void)truncation_radius(*policy, config.dt);
  }

  PathResult path;
  path.seed = grid.seed;
  path.path_id = grid.path_id;
  path.dt = config.dt;
  path.v_values.reserve(static_cast<std::size_t>(n) + 1);
  if (config.store_states) path.states.reserve(static_cast<std::size_t>(n) + 1);
  if (config.store_pre && config.kind == SchemeKind::TruncatedEm) {
    path.pre_truncation.reserve(static_cast<std::size_t>(n));
  }

  const double radius = config.kind == SchemeKind::TruncatedEm
                            ? truncation_radius(*policy, config.dt)
                            : 0.0;
  Vector y = config.x0;
  path.v_values.push_back(spec.value(y));
  if (config.store_states) path.states.push_back(y);

  for (std::int64_t k = 0; k < n; ++k) {
    const Vector db = grid.increment(k);
    if (config.kind == SchemeKind::TruncatedEm) {
      Vector pre = y + system.drift(y) * config.dt + system.diffusion(y) * db;
      if (!all_finite(pre)) {
        throw NumericFailure("simulate: non-finite predictor at step " +
                             std::to_string(k + 1));
      }
      if (!path.first_truncation_step && pre.norm() >= radius) {
        path.first_truncation_step = k + 1;
      }
      Vector post = truncate_to_radius(radius, pre);
      if (config.store_pre) path.pre_truncation.push_back(std::move(pre));
      y = std::move(post);
    } else {
      y = step_classical(system, y, config.dt, db);
      if (diverged_state(y)) {
        path.diverged_at = k + 1;
        path.steps = k + 1;
        path.terminal = y;
        path.v_values.push_back(std::numeric_limits<double>::quiet_NaN());
        if (config.store_states) path.states.push_back(y);
        return path;
      }
    }
    path.v_values.push_back(spec.value(y));
    if (config.store_states) path.states.push_back(y);
  }
  path.steps = n;
  path.terminal = y;
  return path;
}

Vector interpolate_auxiliary(const PathResult& path, const SdeSystem& system,
                             const BrownianGrid& fine_grid, double t) {
  const double T = path.dt * static_cast<double>(path.steps);
  if (t < 0.0 || t > T + 1e-12 * std::max(1.0, T)) {
    std::ostringstream os;
    os << "interpolate_auxiliary: t = " << t << " outside [0, " << T << "]";
    throw DomainError(os.str());
  }
  if (path.states.empty()) {
    throw ConfigError("interpolate_auxiliary: path was simulated without stored states");
  }
  const double ratio = path.dt / fine_grid.dt_fine;
  const std::int64_t r = std::llround(ratio);
  if (r <= 0 || std::abs(ratio - r) > 1e-9) {
    throw ConfigError("interpolate_auxiliary: path step is not a multiple of the grid step");
  }
  std::int64_t k = static_cast<std::int64_t>(std::floor(t / path.dt));
  if (k >= path.steps) k = path.steps;  // t == T
  const double t_k = k * path.dt;
  if (t == t_k) return path.states[static_cast<std::size_t>(k)];

  const double offset = (t - t_k) / fine_grid.dt_fine;
  const std::int64_t fine_steps = std::llround(offset);
  if (std::abs(offset - fine_steps) > 1e-9) {
    throw DomainError("interpolate_auxiliary: t does not align with the fine grid");
  }
  const Vector& y_k = path.states[static_cast<std::size_t>(k)];
  const Vector db = fine_grid.partial_sum(k * r, k * r + fine_steps);
  return y_k + system.drift(y_k) * (t - t_k) + system.diffusion(y_k) * db;
}

}  // namespace vtem
