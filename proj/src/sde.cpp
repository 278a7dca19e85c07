#include "vtem/sde.hpp"

#include <cmath>
#include <sstream>

namespace vtem {

namespace {

bool offset_style(const LyapunovSpec& spec) {
  return spec.class_flag != LyapunovClass::KernelZero;
}

// Central-difference step per coordinate.
double fd_step(double xi) { return std::max(1e-6, 1e-6 * std::abs(xi)); }

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max({1.0, std::abs(got), std::abs(want)});
}

}  // namespace

double rate_ell(const RateAssumption& rate, const LyapunovSpec& spec) {
  return rate.r + 2.0 * rate.delta2 - 2.0 * spec.delta / rate.a;
}

ValidationReport validate_rate_assumption(const RateAssumption& rate,
                                          const LyapunovSpec& spec,
                                          double theta) {
  ValidationReport report;
  report.subject = "rate-assumption";
  const double ell = rate_ell(rate, spec);
  report.samples_checked = 3;
  if (!(ell > 0.0)) {
    report.violations.push_back({"rate-ell-positive", Vector(), ell, 0.0,
                                 "ell = r + 2 delta2 - 2 delta4/a must be positive"});
  }
  const double r_floor = 2.0 * (spec.delta / rate.a - rate.delta2);
  if (!(rate.r > r_floor)) {
    report.violations.push_back({"rate-r-floor", Vector(), rate.r, r_floor,
                                 "r must exceed 2(delta4/a - delta2)"});
  }
  if (ell > 0.0) {
    // Step-exponent window tau <= theta (rho - a) / (a ell); fails whenever
    // rho <= a, in which case the rate theorem does not apply.
    const double tau_cap = theta * (spec.rho - rate.a) / (rate.a * ell);
    if (!(spec.rho > rate.a) || !(rate.tau <= tau_cap)) {
      std::ostringstream os;
      os << "tau window requires rho > a and tau <= theta(rho-a)/(a ell); rho="
         << spec.rho << " a=" << rate.a << " cap=" << tau_cap;
      report.violations.push_back({"rate-tau-window", Vector(), rate.tau,
                                   tau_cap, os.str()});
    }
  }
  return report;
}

double generator(const LyapunovSpec& spec, const SdeSystem& system,
                 const Vector& x) {
  if (!all_finite(x)) throw NumericFailure("generator: non-finite state " + format_state(x));
  const Vector grad = spec.gradient(x);
  const Vector f = system.drift(x);
  const Matrix g = system.diffusion(x);
  const Matrix hess = spec.hessian(x);
  const double first = grad.dot(f);
  const double second = 0.5 * (g.transpose() * hess * g).trace();
  const double out = first + second;
  if (!std::isfinite(out)) {
    throw NumericFailure("generator: non-finite value at x = " + format_state(x));
  }
  return out;
}

double generator_power(const LyapunovSpec& spec, const SdeSystem& system,
                       const Vector& x, double rho) {
  const double v = spec.value(x);
  const double lv = generator(spec, system, x);
  const Vector grad = spec.gradient(x);
  const Matrix g = system.diffusion(x);
  const double grad_g_sq = (grad.transpose() * g).squaredNorm();
  const double base = offset_style(spec) ? 1.0 + v : v;
  if (!(base > 0.0)) {
    throw DegenerateInput("generator_power: V(x) = 0 at x = " + format_state(x) +
                          " under the V-power form");
  }
  if (rho == 1.0) return lv;  // the (rho - 1) term vanishes and the powers cancel
  const double out = 0.5 * rho * std::pow(base, rho - 2.0) *
                     (2.0 * base * lv + (rho - 1.0) * grad_g_sq);
  if (!std::isfinite(out)) {
    throw NumericFailure("generator_power: non-finite value at x = " + format_state(x));
  }
  return out;
}

ValidationReport validate_structure_condition(const LyapunovSpec& spec,
                                              const SdeSystem& system,
                                              double lambda,
                                              const std::vector<Vector>& samples,
                                              double tol) {
  if (samples.empty()) throw ConfigError("validate_structure_condition: empty sample set");
  ValidationReport report;
  report.subject = "structure-condition";
  for (const Vector& x : samples) {
    const double v = spec.value(x);
    double lhs;
    if (!offset_style(spec) && v <= 0.0) {
      // At the kernel only an equilibrium keeps the condition meaningful.
      const bool at_equilibrium =
          system.equilibrium && (x - *system.equilibrium).norm() <= 1e-12;
      if (!at_equilibrium) continue;
      lhs = 0.0;
    } else {
      lhs = generator_power(spec, system, x, spec.rho);
    }
    const double rhs = lambda * (1.0 + std::pow(v, spec.rho));
    ++report.samples_checked;
    if (lhs > rhs + tol) {
      report.violations.push_back({"structure-condition", x, lhs, rhs,
                                   "L(1+V)^rho exceeds lambda(1+V^rho)"});
    }
  }
  return report;
}

ValidationReport validate_derivatives(const LyapunovSpec& spec,
                                      const std::vector<Vector>& samples,
                                      double tol) {
  if (!(tol > 0.0)) throw ConfigError("validate_derivatives: tol must be positive");
  ValidationReport report;
  report.subject = "derivatives";
  for (const Vector& x : samples) {
    ++report.samples_checked;
    const int d = static_cast<int>(x.size());
    const Vector grad = spec.gradient(x);
    const Matrix hess = spec.hessian(x);
    for (int i = 0; i < d; ++i) {
      const double h = fd_step(x[i]);
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd_grad = (spec.value(xp) - spec.value(xm)) / (2.0 * h);
      if (rel_err(fd_grad, grad[i]) > tol) {
        report.violations.push_back({"gradient", x, fd_grad, grad[i],
                                     "finite difference of V disagrees with gradient[" +
                                         std::to_string(i) + "]"});
      }
      const Vector fd_hess_col = (spec.gradient(xp) - spec.gradient(xm)) / (2.0 * h);
      for (int j = 0; j < d; ++j) {
        if (rel_err(fd_hess_col[j], hess(j, i)) > tol) {
          report.violations.push_back({"hessian", x, fd_hess_col[j], hess(j, i),
                                       "finite difference of gradient disagrees with hessian(" +
                                           std::to_string(j) + "," + std::to_string(i) + ")"});
        }
      }
    }
  }
  return report;
}

ValidationReport validate_class_membership(const LyapunovSpec& spec,
                                           const std::vector<Vector>& samples) {
  ValidationReport report;
  report.subject = "class-membership";
  const double c = spec.growth_constant;
  const double delta = spec.delta;
  const bool offset = offset_style(spec);
  // 1/delta must be an integer >= p.
  const double inv = 1.0 / delta;
  if (std::abs(inv - std::llround(inv)) > 1e-9 ||
      std::llround(inv) < spec.smoothness_order) {
    report.violations.push_back({"delta-reciprocal", Vector(), inv,
                                 static_cast<double>(spec.smoothness_order),
                                 "1/delta must be an integer >= smoothness order"});
  }
  for (const Vector& x : samples) {
    ++report.samples_checked;
    const double v = spec.value(x);
    if (v < 0.0) {
      report.violations.push_back({"nonnegative", x, v, 0.0, "V must be nonnegative"});
      continue;
    }
    const double base = offset ? 1.0 + v : v;
    const double grad_norm = spec.gradient(x).norm();
    const double hess_norm = spec.hessian(x).norm();  // Frobenius
    const double b1 = c * std::pow(base, 1.0 - delta);
    const double b2 = c * std::pow(base, 1.0 - 2.0 * delta);
    const double slack = 1e-9 * std::max(1.0, std::abs(b1));
    if (grad_norm > b1 + slack) {
      report.violations.push_back({"growth-n1", x, grad_norm, b1,
                                   "|D1 V| exceeds c base^(1-delta)"});
    }
    if (hess_norm > b2 + 1e-9 * std::max(1.0, std::abs(b2))) {
      report.violations.push_back({"growth-n2", x, hess_norm, b2,
                                   "|D2 V| exceeds c base^(1-2 delta)"});
    }
    for (double eps : {0.1, 0.5, 0.9}) {
      const double scaled = spec.value(eps * x);
      if (scaled > v + 1e-9 * std::max(1.0, v)) {
        report.violations.push_back({"monotone-scaling", x, scaled, v,
                                     "V(eps x) > V(x) at eps = " + std::to_string(eps)});
      }
    }
    // Radial unboundedness, spot-checked as strict growth along the ray.
    if (x.norm() >= 1.0) {
      const double grown = spec.value(4.0 * x);
      if (!(grown > v)) {
        report.violations.push_back({"radial-growth", x, grown, v,
                                     "V(4x) does not exceed V(x)"});
      }
    }
  }
  return report;
}

namespace {

// Multiindices of the given order over dim coordinates.
void enumerate_multiindices(int dim, int order, std::vector<int>& current,
                            std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == dim - 1) {
    int used = 0;
    for (int e : current) used += e;
    if (used <= order) {
      current.push_back(order - used);
      out.push_back(current);
      current.pop_back();
    }
    return;
  }
  int used = 0;
  for (int e : current) used += e;
  for (int e = 0; e + used <= order; ++e) {
    current.push_back(e);
    enumerate_multiindices(dim, order, current, out);
    current.pop_back();
  }
}

std::vector<std::vector<int>> multiindices(int dim, int order) {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  enumerate_multiindices(dim, order, current, out);
  return out;
}

// D^alpha V via central differences of the Hessian: two orders are taken
// from an entry H(j, k) and the rest by differencing in the remaining
// coordinates.
double fd_derivative_from_hessian(const LyapunovSpec& spec, const Vector& x,
                                  std::vector<int> alpha) {
  int j = -1, k = -1;
  for (int i = 0; i < static_cast<int>(alpha.size()) && k < 0; ++i) {
    while (alpha[i] > 0 && k < 0) {
      alpha[i] -= 1;
      if (j < 0) {
        j = i;
      } else {
        k = i;
      }
    }
  }
  const double h = 1e-4;
  std::vector<int> rest;
  for (int i = 0; i < static_cast<int>(alpha.size()); ++i) {
    for (int e = 0; e < alpha[i]; ++e) rest.push_back(i);
  }
  if (rest.empty()) return spec.hessian(x)(j, k);
  if (rest.size() == 1) {
    Vector xp = x, xm = x;
    xp[rest[0]] += h;
    xm[rest[0]] -= h;
    return (spec.hessian(xp)(j, k) - spec.hessian(xm)(j, k)) / (2.0 * h);
  }
  // Two remaining differentiations (order 4).
  const int a = rest[0], b = rest[1];
  if (a == b) {
    Vector xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    return (spec.hessian(xp)(j, k) - 2.0 * spec.hessian(x)(j, k) +
            spec.hessian(xm)(j, k)) /
           (h * h);
  }
  Vector xpp = x, xpm = x, xmp = x, xmm = x;
  xpp[a] += h;
  xpp[b] += h;
  xpm[a] += h;
  xpm[b] -= h;
  xmp[a] -= h;
  xmp[b] += h;
  xmm[a] -= h;
  xmm[b] -= h;
  return (spec.hessian(xpp)(j, k) - spec.hessian(xpm)(j, k) -
          spec.hessian(xmp)(j, k) + spec.hessian(xmm)(j, k)) /
         (4.0 * h * h);
}

}  // namespace

ValidationReport validate_class_membership_higher(
    const LyapunovSpec& spec, const std::vector<Vector>& samples,
    double slack) {
  ValidationReport report;
  report.subject = "class-membership-higher";
  const bool offset = offset_style(spec);
  const double c = spec.growth_constant;
  for (const Vector& x : samples) {
    ++report.samples_checked;
    const double v = spec.value(x);
    const double base = offset ? 1.0 + v : v;
    for (int order = 3; order <= spec.smoothness_order && order <= 4; ++order) {
      double norm_sq = 0.0;
      for (const std::vector<int>& alpha :
           multiindices(static_cast<int>(x.size()), order)) {
        const double d = fd_derivative_from_hessian(spec, x, alpha);
        norm_sq += d * d;
      }
      const double measured = std::sqrt(norm_sq);
      if (base <= 0.0) {
        if (measured > slack) {
          report.violations.push_back({"growth-n" + std::to_string(order), x,
                                       measured, 0.0,
                                       "nonzero derivative at the kernel"});
        }
        continue;
      }
      const double bound = c * std::pow(base, 1.0 - order * spec.delta);
      if (measured > bound * (1.0 + slack) + slack) {
        report.violations.push_back({"growth-n" + std::to_string(order), x,
                                     measured, bound,
                                     "|D" + std::to_string(order) +
                                         " V| exceeds c base^(1-n delta)"});
      }
    }
  }
  return report;
}

ValidationReport validate_system(const SdeSystem& system,
                                 const std::vector<Vector>& samples) {
  ValidationReport report;
  report.subject = "system";
  for (const Vector& x : samples) {
    ++report.samples_checked;
    const Vector f = system.drift(x);
    const Matrix g = system.diffusion(x);
    if (!all_finite(f) || f.size() != system.state_dim) {
      report.violations.push_back({"drift-finite", x, f.size() ? f[0] : 0.0, 0.0,
                                   "drift non-finite or wrong dimension"});
    }
    if (!all_finite(g) || g.rows() != system.state_dim || g.cols() != system.noise_dim) {
      report.violations.push_back({"diffusion-finite", x, 0.0, 0.0,
                                   "diffusion non-finite or wrong shape"});
    }
  }
  if (system.equilibrium) {
    const Vector& xs = *system.equilibrium;
    const double fn = system.drift(xs).norm();
    const double gn = system.diffusion(xs).norm();
    if (fn > 1e-12) {
      report.violations.push_back({"equilibrium-drift", xs, fn, 1e-12,
                                   "|f(x*)| above tolerance"});
    }
    if (gn > 1e-12) {
      report.violations.push_back({"equilibrium-diffusion", xs, gn, 1e-12,
                                   "|g(x*)| above tolerance"});
    }
  }
  return report;
}

}  // namespace vtem
