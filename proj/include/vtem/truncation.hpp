#pragma once

#include "vtem/sde.hpp"
#include "vtem/types.hpp"
#include "vtem/validation.hpp"

#include <functional>

namespace vtem {

// Strictly increasing growth envelope phi on [domain_floor, inf). The
// inverse is optional; without one, envelope_inverse brackets by doubling
// and bisects to relative width 1e-12.
struct MonotoneEnvelope {
  std::function<double(double)> forward;
  std::function<double(double)> inverse;  // may be empty
  double domain_floor = 1.0;
};

double envelope_inverse(const MonotoneEnvelope& env, double v);

ValidationReport validate_envelope_monotone(const MonotoneEnvelope& env,
                                            double u_max, int samples = 64);

// Which scheme family the policy truncates for. The three families differ
// only in the envelope inequality their radius enforces:
//   FiniteTime    |f|/(1+V)^d           and |g|^2/(1+V)^(2d)
//   StabilityBar  |f|/(L^(1/2) V^d)     and |g|^2/(L V^(2d)),  L = Lambda_rho
//   StabilityHat  (1+V)^(1/2-d)|f|/(L V)^(1/2) and (1+V)^(1-2d)|g|^2/(L V)
enum class TruncationVariant { FiniteTime, StabilityBar, StabilityHat };

// For V^rho = |x|^(2 rho) with w >= mu V^rho the bar weights reduce to
// |f|/V^d and |g|^2/V^(2d); NormSimplified selects that special case.
enum class BarWeightMode { LambdaWeighted, NormSimplified };

struct TruncationPolicy {
  TruncationVariant variant = TruncationVariant::FiniteTime;
  BarWeightMode bar_mode = BarWeightMode::LambdaWeighted;
  MonotoneEnvelope envelope;
  double k_const = 1.0;    // K
  double theta = 0.5;      // FiniteTime: (0, 1/2]; Bar/Hat: (0, 1/2)
  double delta_star = 1.0; // admissible step sizes are (0, delta_star]
};

// K * dt^(-theta), the envelope level the radius is cut at.
double envelope_level(const TruncationPolicy& policy, double dt);

// theta within the variant's admissible interval (and <= 1/3 when the
// Lyapunov spec has smoothness order 3), delta_star in (0,1].
void validate_policy_parameters(const TruncationPolicy& policy,
                                const LyapunovSpec& spec);

// K (delta_star)^(-theta) >= phi(|x0| v 1).
bool policy_feasible(const TruncationPolicy& policy, const Vector& x0);

// Lambda_rho(x) = 1 ^ (w(x)/V^rho(x)); equals 1 where V vanishes.
double lambda_rho(const LyapunovSpec& spec, const DecayFunction& decay,
                  const Vector& x);

// Variant-appropriate growth ratios; the envelope must dominate both on
// every ball it is quoted for. decay may be null for FiniteTime.
double drift_growth_ratio(const TruncationPolicy& policy,
                          const LyapunovSpec& spec, const SdeSystem& system,
                          const DecayFunction* decay, const Vector& x);
double diffusion_growth_ratio(const TruncationPolicy& policy,
                              const LyapunovSpec& spec, const SdeSystem& system,
                              const DecayFunction* decay, const Vector& x);

// Checks sup of both ratios against phi(u) at radii {u, u/2, u/4} over
// deterministic sphere directions, for each u in u_values.
ValidationReport envelope_validate(const TruncationPolicy& policy,
                                   const LyapunovSpec& spec,
                                   const SdeSystem& system,
                                   const DecayFunction* decay,
                                   const std::vector<double>& u_values,
                                   int directions = 32, double tol = 1e-9);

// phi^(-1)(K dt^(-theta)); increases as dt decreases.
double truncation_radius(const TruncationPolicy& policy, double dt);

// pi(x) = (|x| ^ radius) x/|x| with 0 mapped to 0. States already inside
// the ball are returned bitwise unchanged.
Vector truncate(const TruncationPolicy& policy, double dt, const Vector& x);

// Same projection against a precomputed radius; lets simulation loops skip
// the per-step envelope inversion.
Vector truncate_to_radius(double radius, const Vector& x);

// Both per-step growth bounds at the truncated state, with slack tol:
// ratio_f <= K dt^(-theta) and ratio_g <= K dt^(-theta).
bool growth_bound_check(const TruncationPolicy& policy, const LyapunovSpec& spec,
                        const SdeSystem& system, const DecayFunction* decay,
                        const Vector& x_truncated, double dt, double tol = 1e-9);

}  // namespace vtem
