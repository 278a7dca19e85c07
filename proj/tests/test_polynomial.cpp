#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vtem/polynomial.hpp"

#include "test_helpers.hpp"

#include <cmath>

using namespace vtem;
using namespace vtem::testing;

TEST_CASE("parsing monomial sums") {
  const Polynomial p = Polynomial::parse("-0.5*x - x^3", 1);
  CHECK(p.vars() == 1);
  CHECK(p.degree() == 3);
  CHECK(p.eval(vec1(2.0)) == doctest::Approx(-9.0));
  CHECK(p.eval(vec1(-1.0)) == doctest::Approx(1.5));
}

TEST_CASE("parsing multivariate terms") {
  const Polynomial p = Polynomial::parse("x1^4 + x2^2 + x1*x2 + 4*x1^2", 2);
  CHECK(p.eval(vec2(1.0, 1.0)) == doctest::Approx(7.0));
  CHECK(p.eval(vec2(2.0, -1.0)) == doctest::Approx(16.0 + 1.0 - 2.0 + 16.0));
}

TEST_CASE("rational coefficients stay exact through differentiation") {
  const Polynomial p = Polynomial::parse("1/3*x^3", 1);
  const Polynomial dp = p.derivative(0);
  CHECK(dp.eval(vec1(3.0)) == doctest::Approx(9.0).epsilon(1e-15));
  const Polynomial ddp = dp.derivative(0);
  CHECK(ddp.eval(vec1(5.0)) == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("derivatives of multivariate polynomials") {
  const Polynomial v = Polynomial::parse("x1^4 + x2^2 + x1*x2 + 4*x1^2", 2);
  const Polynomial d1 = v.derivative(0);
  const Polynomial d2 = v.derivative(1);
  CHECK(d1.eval(vec2(1.0, 1.0)) == doctest::Approx(13.0));
  CHECK(d2.eval(vec2(1.0, 1.0)) == doctest::Approx(3.0));
  // Mixed partials commute.
  CHECK(d1.derivative(1).eval(vec2(0.3, -2.0)) ==
        d2.derivative(0).eval(vec2(0.3, -2.0)));
}

TEST_CASE("coefficient bound dominates the polynomial on the ball") {
  const Polynomial p = Polynomial::parse("2*x1^3 - x2 + 1/2*x1*x2", 2);
  for (double u : {0.5, 1.0, 3.0}) {
    const double bound = p.coefficient_bound(u);
    for (const Vector& x : random_states(2, u / std::sqrt(2.0), 100)) {
      CHECK(std::abs(p.eval(x)) <= bound + 1e-12);
    }
  }
}

TEST_CASE("term merging cancels exactly") {
  const Polynomial p = Polynomial::parse("x^2 - x^2 + x", 1);
  CHECK(p.terms().size() == 1);
  CHECK(p.eval(vec1(7.0)) == doctest::Approx(7.0));
}

TEST_CASE("malformed input is a configuration error") {
  CHECK_THROWS_AS(Polynomial::parse("x^", 1), ConfigError);
  CHECK_THROWS_AS(Polynomial::parse("x^-2", 1), ConfigError);
  CHECK_THROWS_AS(Polynomial::parse("2**x", 1), ConfigError);
  CHECK_THROWS_AS(Polynomial::parse("x1 + y", 1), ConfigError);
  CHECK_THROWS_AS(Polynomial::parse("x3", 2), ConfigError);
  CHECK_THROWS_AS(Polynomial::parse("1/0*x", 1), ConfigError);
}

TEST_CASE("envelope variable u parses as the first variable") {
  const Polynomial phi = Polynomial::parse("u^2 + 1", 1);
  CHECK(phi.eval(vec1(3.0)) == doctest::Approx(10.0));
}
