#pragma once

#include "vtem/types.hpp"
#include "vtem/validation.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace vtem {

// Drift/diffusion pair dX = f(X)dt + g(X)dB with B an m-dimensional
// Brownian motion. Coefficients are plain callables; they must be pure and
// locally bounded. An optional equilibrium x* must satisfy f(x*) = 0,
// g(x*) = 0 (checked to 1e-12 by validate_system).
struct SdeSystem {
  int state_dim = 1;
  int noise_dim = 1;
  std::function<Vector(const Vector&)> drift;
  std::function<Matrix(const Vector&)> diffusion;
  std::optional<Vector> equilibrium;
};

// Which derivative-growth bounds the Lyapunov function satisfies:
//   Offset     |D^(n)V| <= c (1+V)^(1-n*delta)
//   KernelZero |D^(n)V| <= c V^(1-n*delta)        and V(x)=0 iff x=0
//   Hat        offset-style bounds               and V(x)=0 iff x=0
enum class LyapunovClass { Offset, KernelZero, Hat };

// V with analytic gradient and Hessian plus its class data. Higher
// derivatives are not stored; they enter only through the class bounds,
// which validate_class_membership can probe by finite differences.
struct LyapunovSpec {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
  double rho = 0.5;             // moment exponent in V^rho
  double delta = 0.5;           // delta_p with 1/delta an integer >= p
  int smoothness_order = 2;     // p in {2,3,4}
  double growth_constant = 2.0; // c in the class bounds
  LyapunovClass class_flag = LyapunovClass::Offset;
};

// Decay function w with L V^rho <= -w. Its kernel is the LaSalle limit set;
// mu, when present, certifies w >= mu V^rho (exponential decay).
struct DecayFunction {
  std::function<double(const Vector&)> w;
  bool kernel_is_origin = true;
  std::optional<double> mu;
  // Distance to Ker(w) when the kernel is not the origin.
  std::function<double(const Vector&)> distance;
};

// Data of the convergence-rate hypotheses: the auxiliary metric U with its
// own exponent delta2, the concave modulus kappa, and the constants the
// rate statement consumes. Only the feasibility inequalities are checked;
// the constants themselves are not measurable from simulations.
struct RateAssumption {
  std::function<double(const Vector&)> metric_u;
  double delta2 = 0.5;
  std::function<double(double)> kappa;
  std::function<double(double)> kappa_inv;
  double a = 1.0;
  double q = 2.0;
  double tau = 1.0;
  double c1 = 2.0;
  double iota = 1.0;
  double kbar = 1.0;
  double r = 1.0;
  double p_bar = 2.0;  // kappa(|x|^p_bar) <= V^rho; moment order q must stay below
};

// ell := r + 2*delta2 - 2*delta4/a, required positive.
double rate_ell(const RateAssumption& rate, const LyapunovSpec& spec);

// Checks ell > 0, r > 2(delta4/a - delta2), and the step-exponent window
// tau <= theta(rho-a)/(a*ell). Violations are data, not errors.
ValidationReport validate_rate_assumption(const RateAssumption& rate,
                                          const LyapunovSpec& spec,
                                          double theta);

// L V(x) = <DV(x), f(x)> + 1/2 tr[g(x)^T D2V(x) g(x)].
double generator(const LyapunovSpec& spec, const SdeSystem& system,
                 const Vector& x);

// L (1+V)^rho in closed form; the KernelZero class replaces (1+V) by V.
// Requires V(x) > 0 for the V-power variant.
double generator_power(const LyapunovSpec& spec, const SdeSystem& system,
                       const Vector& x, double rho);

// Checks L (1+V)^rho <= lambda (1 + V^rho) on the samples (V-power form for
// the KernelZero class). Samples where the V-power form is degenerate are
// skipped unless they sit at the declared equilibrium.
ValidationReport validate_structure_condition(const LyapunovSpec& spec,
                                              const SdeSystem& system,
                                              double lambda,
                                              const std::vector<Vector>& samples,
                                              double tol = 1e-9);

// Central finite differences of V against the analytic gradient, and of the
// gradient against the analytic Hessian.
ValidationReport validate_derivatives(const LyapunovSpec& spec,
                                      const std::vector<Vector>& samples,
                                      double tol);

// Derivative-growth bounds for n = 1, 2 plus the monotone-scaling property
// V(eps x) <= V(x) for eps in {0.1, 0.5, 0.9} and nonnegativity.
ValidationReport validate_class_membership(const LyapunovSpec& spec,
                                           const std::vector<Vector>& samples);

// Optional probe of the order-3 and order-4 growth bounds by central finite
// differences of the analytic Hessian. Only orders up to smoothness_order
// are checked; slack covers the finite-difference truncation error.
ValidationReport validate_class_membership_higher(
    const LyapunovSpec& spec, const std::vector<Vector>& samples,
    double slack = 1e-3);

// Drift/diffusion finiteness on the samples and, when an equilibrium is
// declared, |f(x*)| <= 1e-12 and |g(x*)|_F <= 1e-12.
ValidationReport validate_system(const SdeSystem& system,
                                 const std::vector<Vector>& samples);

}  // namespace vtem
