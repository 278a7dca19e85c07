#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vtem/models.hpp"
#include "vtem/scheme.hpp"
#include "vtem/truncation.hpp"

#include "test_helpers.hpp"

#include <cmath>

using namespace vtem;
using namespace vtem::testing;

TEST_CASE("envelope inverse: closed forms and bisection") {
  SUBCASE("quadratic envelope closed form") {
    const ModelBundle cubic = example_scalar_cubic();
    CHECK(envelope_inverse(cubic.policy.envelope, 5.0) == doctest::Approx(2.0));
    CHECK(envelope_inverse(cubic.policy.envelope, 362.0) == doctest::Approx(19.0));
  }
  SUBCASE("shifted square closed form") {
    const ModelBundle quartic = example_planar_quartic();
    CHECK(envelope_inverse(quartic.policy.envelope, 1024.0) == doctest::Approx(6.0));
  }
  SUBCASE("numeric-only cube envelope by bisection") {
    MonotoneEnvelope env;
    env.forward = [](double u) { return u * u * u; };
    env.domain_floor = 0.0;
    CHECK(envelope_inverse(env, 27.0) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(envelope_inverse(env, 1e9) == doctest::Approx(1000.0).epsilon(1e-9));
  }
  SUBCASE("below-domain input") {
    MonotoneEnvelope env;
    env.forward = [](double u) { return u * u + 1.0; };
    env.domain_floor = 1.0;
    CHECK_THROWS_AS(envelope_inverse(env, 0.5), DomainError);
  }
  SUBCASE("hat envelope round-trip") {
    const ModelBundle duffing = example_duffing_vdp();
    const double v = duffing.policy.envelope.forward(2.0);
    CHECK(envelope_inverse(duffing.policy.envelope, v) ==
          doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("truncation radii match the closed forms") {
  const ModelBundle quartic = example_planar_quartic();
  // radius(dt) = 4 dt^-0.2 - 2
  CHECK(truncation_radius(quartic.policy, 1e-4) ==
        doctest::Approx(4.0 * std::pow(1e-4, -0.2) - 2.0).epsilon(1e-12));
  CHECK(truncation_radius(quartic.policy, 1e-4) ==
        doctest::Approx(23.2382790).epsilon(1e-6));

  const ModelBundle cubic = example_scalar_cubic();
  // radius(dt) = sqrt(110 dt^-1/4 - 1)
  CHECK(truncation_radius(cubic.policy, 0.005) ==
        doctest::Approx(std::sqrt(110.0 * std::pow(0.005, -0.25) - 1.0))
            .epsilon(1e-12));
  CHECK(truncation_radius(cubic.policy, 0.005) ==
        doctest::Approx(20.31417).epsilon(1e-5));

  SUBCASE("radius at delta_star clears the initial condition") {
    for (const ModelBundle* bundle : {&quartic, &cubic}) {
      const double radius =
          truncation_radius(bundle->policy, bundle->policy.delta_star);
      CHECK(radius >= std::max(bundle->x0.norm(), 1.0) - 1e-9);
    }
  }
  SUBCASE("radius is nonincreasing in dt") {
    double prev = 0.0;
    for (double dt : {1e-4, 5e-5, 1e-5, 1e-6, 1e-8}) {
      const double r = truncation_radius(quartic.policy, dt);
      CHECK(r >= prev);
      prev = r;
    }
  }
  SUBCASE("dt outside the policy") {
    CHECK_THROWS_AS(truncation_radius(cubic.policy, 0.02), PolicyViolation);
    CHECK_THROWS_AS(truncation_radius(cubic.policy, 0.0), DomainError);
    CHECK_THROWS_AS(truncation_radius(cubic.policy, -1.0), DomainError);
  }
}

TEST_CASE("truncate") {
  const ModelBundle quartic = example_planar_quartic();
  const double dt = 1e-4;
  const double radius = truncation_radius(quartic.policy, dt);

  SUBCASE("zero maps to zero") {
    CHECK(truncate(quartic.policy, dt, Vector::Zero(2)).norm() == 0.0);
  }
  SUBCASE("inside the ball is returned bitwise") {
    const Vector x = vec2(0.5 * radius, 0.0);
    const Vector y = truncate(quartic.policy, dt, x);
    CHECK(y[0] == x[0]);
    CHECK(y[1] == x[1]);
  }
  SUBCASE("outside is projected radially") {
    const Vector y = truncate(quartic.policy, dt, vec2(30.0, 0.0));
    CHECK(y[0] == doctest::Approx(radius));
    CHECK(y[1] == 0.0);
  }
  SUBCASE("non-finite input") {
    CHECK_THROWS_AS(truncate(quartic.policy, dt, vec2(INFINITY, 0.0)),
                    NumericFailure);
  }
  SUBCASE("idempotent and nonexpanding, V monotone") {
    for (const Vector& x : random_states(2, 60.0, 300)) {
      const Vector once = truncate(quartic.policy, dt, x);
      const Vector twice = truncate(quartic.policy, dt, once);
      CHECK(once[0] == twice[0]);
      CHECK(once[1] == twice[1]);
      CHECK(once.norm() <= x.norm() + 1e-15);
      CHECK(quartic.spec.value(once) <= quartic.spec.value(x) + 1e-12);
    }
  }
}

TEST_CASE("lambda_rho") {
  const ModelBundle quartic = example_planar_quartic();
  // w/V^rho = |x|^2 / 4 for this model.
  CHECK(lambda_rho(quartic.spec, quartic.decay, vec2(2.0, 0.0)) ==
        doctest::Approx(1.0));
  CHECK(lambda_rho(quartic.spec, quartic.decay, vec2(1.0, 0.0)) ==
        doctest::Approx(0.25));
  CHECK(lambda_rho(quartic.spec, quartic.decay, Vector::Zero(2)) == 1.0);
  for (const Vector& x : random_states(2, 10.0, 200)) {
    const double lam = lambda_rho(quartic.spec, quartic.decay, x);
    CHECK(lam >= 0.0);
    CHECK(lam <= 1.0);
  }
}

TEST_CASE("envelope validation") {
  SUBCASE("scalar cubic envelope dominates its simplified ratios") {
    const ModelBundle cubic = example_scalar_cubic();
    const ValidationReport report =
        envelope_validate(cubic.policy, cubic.spec, cubic.system, &cubic.decay,
                          {3.0, 19.0, 38.0});
    CHECK(report.pass());
  }
  SUBCASE("planar quartic envelope dominates its weighted ratios") {
    const ModelBundle quartic = example_planar_quartic();
    CHECK(envelope_validate(quartic.policy, quartic.spec, quartic.system,
                            &quartic.decay, {2.0, 4.0, 23.3})
              .pass());
  }
  SUBCASE("a constant envelope cannot dominate superlinear growth") {
    ModelBundle cubic = example_scalar_cubic();
    cubic.policy.envelope.forward = [](double) { return 1.0; };
    cubic.policy.envelope.inverse = nullptr;
    const ValidationReport report = envelope_validate(
        cubic.policy, cubic.spec, cubic.system, &cubic.decay, {2.0});
    CHECK_FALSE(report.pass());
    CHECK(report.violations.front().measured > 4.0);
  }
}

TEST_CASE("growth bound check") {
  const ModelBundle cubic = example_scalar_cubic();
  const double dt = 0.005;
  const double radius = truncation_radius(cubic.policy, dt);

  SUBCASE("holds at the radius by construction of the envelope") {
    CHECK(growth_bound_check(cubic.policy, cubic.spec, cubic.system, &cubic.decay,
                             vec1(radius), dt));
  }
  SUBCASE("holds at the equilibrium") {
    CHECK(growth_bound_check(cubic.policy, cubic.spec, cubic.system, &cubic.decay,
                             vec1(0.0), dt));
  }
  SUBCASE("fails for an untruncated state beyond the radius") {
    CHECK_FALSE(growth_bound_check(cubic.policy, cubic.spec, cubic.system,
                                   &cubic.decay, vec1(2.0 * radius), dt));
  }
}

TEST_CASE("finite-time variant growth bounds along simulated paths") {
  // Default-envelope polynomial bundle uses the finite-time weights.
  const ModelBundle bundle =
      build_polynomial_model("f = -0.5*x - x^3; g = x; V = x^2; x0 = 3");
  REQUIRE(bundle.policy.variant == TruncationVariant::FiniteTime);
  const double dt = bundle.policy.delta_star / 2.0;
  SchemeConfig config;
  config.kind = SchemeKind::TruncatedEm;
  config.dt = dt;
  config.horizon = 200.0 * dt;
  config.x0 = bundle.x0;
  for (std::int64_t pid = 0; pid < 4; ++pid) {
    const BrownianGrid grid = brownian_grid(99, pid, config.horizon, dt, 1);
    const PathResult path =
        simulate(config, &bundle.policy, bundle.system, bundle.spec, grid);
    for (const Vector& y : path.states) {
      CHECK(growth_bound_check(bundle.policy, bundle.spec, bundle.system,
                               nullptr, y, dt));
    }
  }
}

TEST_CASE("policy feasibility inequality, reference constants") {
  const ModelBundle cubic = example_scalar_cubic();
  const double level = envelope_level(cubic.policy, cubic.policy.delta_star);
  const double need = cubic.policy.envelope.forward(19.0);
  CHECK(need == doctest::Approx(362.0));
  CHECK(level == doctest::Approx(110.0 * std::pow(0.008, -0.25)).epsilon(1e-12));
  CHECK(level >= need);
  CHECK(policy_feasible(cubic.policy, cubic.x0));
}

TEST_CASE("policy parameter windows") {
  ModelBundle cubic = example_scalar_cubic();
  SUBCASE("bar variant needs theta strictly below 1/2") {
    cubic.policy.theta = 0.5;
    CHECK_THROWS_AS(validate_policy_parameters(cubic.policy, cubic.spec),
                    PolicyViolation);
  }
  SUBCASE("finite-time allows theta = 1/2") {
    cubic.policy.variant = TruncationVariant::FiniteTime;
    cubic.policy.theta = 0.5;
    CHECK_NOTHROW(validate_policy_parameters(cubic.policy, cubic.spec));
  }
  SUBCASE("smoothness order 3 caps theta at 1/3") {
    cubic.policy.variant = TruncationVariant::FiniteTime;
    cubic.policy.theta = 0.4;
    cubic.spec.smoothness_order = 3;
    CHECK_THROWS_AS(validate_policy_parameters(cubic.policy, cubic.spec),
                    PolicyViolation);
  }
  SUBCASE("delta_star above 1 is rejected") {
    cubic.policy.delta_star = 1.5;
    CHECK_THROWS_AS(validate_policy_parameters(cubic.policy, cubic.spec),
                    PolicyViolation);
  }
}
