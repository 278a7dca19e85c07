#pragma once

#include "vtem/brownian.hpp"
#include "vtem/sde.hpp"
#include "vtem/truncation.hpp"
#include "vtem/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace vtem {

enum class SchemeKind { TruncatedEm, ClassicalEm };

struct SchemeConfig {
  SchemeKind kind = SchemeKind::TruncatedEm;
  double dt = 1e-3;
  double horizon = 1.0;
  Vector x0;
  bool store_states = true;  // full state sequence (heavy on long horizons)
  bool store_pre = true;     // pre-truncation sequence
};

// One simulated trajectory. states holds Y_0..Y_N (post-truncation),
// pre_truncation holds Y~_1..Y~_N. v_values and the diagnostics are always
// recorded; the sequences obey the storage flags.
struct PathResult {
  std::vector<Vector> states;
  std::vector<Vector> pre_truncation;
  std::vector<double> v_values;
  // First k >= 1 with |Y~_k| >= truncation radius (discrete first-exceedance
  // time); absent when no predictor ever reached the radius.
  std::optional<std::int64_t> first_truncation_step;
  // ClassicalEm only: first step whose state is non-finite or has a
  // coordinate beyond 1e100. The path stops there.
  std::optional<std::int64_t> diverged_at;
  std::uint64_t seed = 0;
  std::int64_t path_id = 0;
  double dt = 0.0;
  Vector terminal;  // last recorded state
  std::int64_t steps = 0;

  double terminal_norm() const { return terminal.norm(); }
};

// Magnitude beyond which a classical-EM state counts as diverged.
inline constexpr double kDivergenceThreshold = 1e100;

// One truncated-EM step: pre = y + f(y)dt + g(y)db, post = pi(pre).
struct StepOutput {
  Vector pre;
  Vector post;
};
StepOutput step_truncated(const TruncationPolicy& policy,
                          const SdeSystem& system, const Vector& y, double dt,
                          const Vector& db);

// Classical EM step, unmodified; non-finite results are the caller's data.
Vector step_classical(const SdeSystem& system, const Vector& y, double dt,
                      const Vector& db);

// Runs N = round(T/dt) steps against the grid (grid dt_fine must equal dt
// and cover the horizon). policy is required for TruncatedEm and ignored
// for ClassicalEm. Pure function of its inputs.
PathResult simulate(const SchemeConfig& config, const TruncationPolicy* policy,
                    const SdeSystem& system, const LyapunovSpec& spec,
                    const BrownianGrid& grid);

// The affine interpolant Y~(t) = Y_k + f(Y_k)(t - t_k) + g(Y_k)(B(t)-B(t_k))
// for t in [t_k, t_{k+1}); coincides with Y_k at grid points (bitwise).
// fine_grid must be the grid the path consumed, at its original fine step;
// t must align with the fine resolution.
Vector interpolate_auxiliary(const PathResult& path, const SdeSystem& system,
                             const BrownianGrid& fine_grid, double t);

}  // namespace vtem
