#include "vtem/truncation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace vtem {

double envelope_inverse(const MonotoneEnvelope& env, double v) {
  const double floor_value = env.forward(env.domain_floor);
  if (v < floor_value - 1e-12 * std::max(1.0, std::abs(floor_value))) {
    std::ostringstream os;
    os << "envelope_inverse: v = " << v << " below phi(domain floor) = " << floor_value;
    throw DomainError(os.str());
  }
  if (env.inverse) return env.inverse(v);
  // Bracket by doubling from the floor, then bisect.
  double lo = env.domain_floor;
  double hi = std::max(1.0, std::abs(lo));
  int iter = 0;
  while (env.forward(hi) < v) {
    lo = hi;
    hi *= 2.0;
    if (++iter > 200) throw DomainError("envelope_inverse: failed to bracket");
  }
  for (iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (env.forward(mid) < v) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

ValidationReport validate_envelope_monotone(const MonotoneEnvelope& env,
                                            double u_max, int samples) {
  ValidationReport report;
  report.subject = "envelope-monotone";
  double prev_u = env.domain_floor;
  double prev_v = env.forward(prev_u);
  for (int i = 1; i <= samples; ++i) {
    const double u = env.domain_floor + (u_max - env.domain_floor) * i / samples;
    const double v = env.forward(u);
    ++report.samples_checked;
    if (!(v > prev_v)) {
      Vector w(1);
      w[0] = u;
      report.violations.push_back({"strict-monotone", w, v, prev_v,
                                   "phi not strictly increasing"});
    }
    if (env.inverse) {
      const double back = env.forward(env.inverse(v));
      if (std::abs(back - v) > 1e-9 * std::max(1.0, std::abs(v))) {
        Vector w(1);
        w[0] = u;
        report.violations.push_back({"inverse-roundtrip", w, back, v,
                                     "phi(phi^-1(v)) != v"});
      }
    }
    prev_u = u;
    prev_v = v;
  }
  return report;
}

double envelope_level(const TruncationPolicy& policy, double dt) {
  return policy.k_const * std::pow(dt, -policy.theta);
}

void validate_policy_parameters(const TruncationPolicy& policy,
                                const LyapunovSpec& spec) {
  const bool finite_time = policy.variant == TruncationVariant::FiniteTime;
  double theta_max = finite_time ? 0.5 : std::nextafter(0.5, 0.0);
  if (spec.smoothness_order == 3) theta_max = std::min(theta_max, 1.0 / 3.0);
  if (!(policy.theta > 0.0) || policy.theta > theta_max) {
    std::ostringstream os;
    os << "policy theta = " << policy.theta << " outside (0, " << theta_max << "]";
    throw PolicyViolation(os.str());
  }
  if (!(policy.delta_star > 0.0) || policy.delta_star > 1.0) {
    throw PolicyViolation("policy delta_star must lie in (0, 1]");
  }
  if (!(policy.k_const > 0.0)) throw PolicyViolation("policy K must be positive");
}

bool policy_feasible(const TruncationPolicy& policy, const Vector& x0) {
  const double level = envelope_level(policy, policy.delta_star);
  const double need = policy.envelope.forward(std::max(x0.norm(), 1.0));
  return level >= need;
}

double lambda_rho(const LyapunovSpec& spec, const DecayFunction& decay,
                  const Vector& x) {
  const double v = spec.value(x);
  if (!(v > 0.0)) return 1.0;
  const double ratio = decay.w(x) / std::pow(v, spec.rho);
  return std::min(1.0, ratio);
}

namespace {

struct RatioParts {
  double f_ratio;
  double g_ratio;
};

RatioParts growth_ratios(const TruncationPolicy& policy, const LyapunovSpec& spec,
                         const SdeSystem& system, const DecayFunction* decay,
                         const Vector& x) {
  const double f_norm = system.drift(x).norm();
  const double g_sq = system.diffusion(x).squaredNorm();
  const double v = spec.value(x);
  switch (policy.variant) {
    case TruncationVariant::FiniteTime: {
      const double df = std::pow(1.0 + v, spec.delta);
      return {f_norm / df, g_sq / (df * df)};
    }
    case TruncationVariant::StabilityBar: {
      const double vd = std::pow(v, spec.delta);
      if (policy.bar_mode == BarWeightMode::NormSimplified) {
        if (vd == 0.0) return {f_norm == 0.0 ? 0.0 : INFINITY, g_sq == 0.0 ? 0.0 : INFINITY};
        return {f_norm / vd, g_sq / (vd * vd)};
      }
      if (!decay) throw ConfigError("stability-bar ratios require a decay function");
      const double lam = lambda_rho(spec, *decay, x);
      const double den_f = std::sqrt(lam) * vd;
      const double den_g = lam * vd * vd;
      if (den_f == 0.0 || den_g == 0.0) {
        return {f_norm == 0.0 ? 0.0 : INFINITY, g_sq == 0.0 ? 0.0 : INFINITY};
      }
      return {f_norm / den_f, g_sq / den_g};
    }
    case TruncationVariant::StabilityHat: {
      if (!decay) throw ConfigError("stability-hat ratios require a decay function");
      const double lam = lambda_rho(spec, *decay, x);
      const double lv = lam * v;
      if (lv == 0.0) {
        return {f_norm == 0.0 ? 0.0 : INFINITY, g_sq == 0.0 ? 0.0 : INFINITY};
      }
      const double num_f = std::pow(1.0 + v, 0.5 - spec.delta) * f_norm;
      const double num_g = std::pow(1.0 + v, 1.0 - 2.0 * spec.delta) * g_sq;
      return {num_f / std::sqrt(lv), num_g / lv};
    }
  }
  throw ConfigError("unknown truncation variant");
}

}  // namespace

double drift_growth_ratio(const TruncationPolicy& policy, const LyapunovSpec& spec,
                          const SdeSystem& system, const DecayFunction* decay,
                          const Vector& x) {
  return growth_ratios(policy, spec, system, decay, x).f_ratio;
}

double diffusion_growth_ratio(const TruncationPolicy& policy,
                              const LyapunovSpec& spec, const SdeSystem& system,
                              const DecayFunction* decay, const Vector& x) {
  return growth_ratios(policy, spec, system, decay, x).g_ratio;
}

ValidationReport envelope_validate(const TruncationPolicy& policy,
                                   const LyapunovSpec& spec,
                                   const SdeSystem& system,
                                   const DecayFunction* decay,
                                   const std::vector<double>& u_values,
                                   int directions, double tol) {
  ValidationReport report;
  report.subject = "envelope";
  const std::vector<Vector> dirs = sample_directions(system.state_dim, directions);
  for (double u : u_values) {
    const double bound = policy.envelope.forward(u);
    double worst = 0.0;
    Vector worst_x = Vector::Zero(system.state_dim);
    for (double radius : {u, 0.5 * u, 0.25 * u}) {
      for (const Vector& dir : dirs) {
        const Vector x = radius * dir;
        const RatioParts r = growth_ratios(policy, spec, system, decay, x);
        ++report.samples_checked;
        const double m = std::max(r.f_ratio, r.g_ratio);
        if (m > worst) {
          worst = m;
          worst_x = x;
        }
      }
    }
    if (worst > bound + tol * std::max(1.0, bound)) {
      std::ostringstream os;
      os << "worst growth ratio exceeds phi(" << u << ")";
      report.violations.push_back({"envelope", worst_x, worst, bound, os.str()});
    }
  }
  return report;
}

double truncation_radius(const TruncationPolicy& policy, double dt) {
  if (!(dt > 0.0)) throw DomainError("truncation_radius: dt must be positive");
  if (dt > policy.delta_star) {
    std::ostringstream os;
    os << "truncation_radius: dt = " << dt << " exceeds delta_star = "
       << policy.delta_star;
    throw PolicyViolation(os.str());
  }
  return envelope_inverse(policy.envelope, envelope_level(policy, dt));
}

Vector truncate(const TruncationPolicy& policy, double dt, const Vector& x) {
  if (!all_finite(x)) {
    throw NumericFailure("truncate: non-finite state " + format_state(x));
  }
  return truncate_to_radius(truncation_radius(policy, dt), x);
}

Vector truncate_to_radius(double radius, const Vector& x) {
  const double norm = x.norm();
  if (norm <= radius) return x;  // ties resolve to "unchanged"
  if (norm == 0.0) return Vector::Zero(x.size());
  Vector y = (radius / norm) * x;
  // Rounding can leave |y| a few ulps above the radius; nudge inside so a
  // second application returns y unchanged.
  for (int i = 0; i < 8 && y.norm() > radius; ++i) {
    y *= 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
  }
  return y;
}

bool growth_bound_check(const TruncationPolicy& policy, const LyapunovSpec& spec,
                        const SdeSystem& system, const DecayFunction* decay,
                        const Vector& x_truncated, double dt, double tol) {
  const double level = envelope_level(policy, dt);
  const RatioParts r = growth_ratios(policy, spec, system, decay, x_truncated);
  const double slack = tol * std::max(1.0, level);
  return r.f_ratio <= level + slack && r.g_ratio <= level + slack;
}

}  // namespace vtem
