#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vtem/brownian.hpp"

#include <cmath>

using namespace vtem;

TEST_CASE("streams are deterministic in (seed, path_id)") {
  const BrownianGrid a = brownian_grid(1234, 7, 1.0, 1e-3, 2);
  const BrownianGrid b = brownian_grid(1234, 7, 1.0, 1e-3, 2);
  REQUIRE(a.increments.size() == b.increments.size());
  for (std::size_t i = 0; i < a.increments.size(); ++i) {
    CHECK(a.increments[i] == b.increments[i]);
  }
}

TEST_CASE("distinct path ids give effectively independent streams") {
  const int n = 100000;
  NormalStream s0(42, 0);
  NormalStream s1(42, 1);
  double first0 = 0.0, first1 = 0.0;
  double sum = 0.0, sum0 = 0.0, sum1 = 0.0, sq0 = 0.0, sq1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = s0.next();
    const double b = s1.next();
    if (i == 0) {
      first0 = a;
      first1 = b;
    }
    sum += a * b;
    sum0 += a;
    sum1 += b;
    sq0 += a * a;
    sq1 += b * b;
  }
  CHECK(first0 != first1);
  const double cov = sum / n - (sum0 / n) * (sum1 / n);
  const double corr = cov / std::sqrt((sq0 / n - std::pow(sum0 / n, 2)) *
                                      (sq1 / n - std::pow(sum1 / n, 2)));
  CHECK(std::abs(corr) < 0.02);
}

TEST_CASE("increment variance matches the step size") {
  const double dt = 0.01;
  const BrownianGrid grid = brownian_grid(2026, 0, 10000.0, dt, 1);
  REQUIRE(grid.steps() == 1000000);
  double sum = 0.0, sum_sq = 0.0;
  for (double v : grid.increments) {
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(grid.increments.size());
  const double var = sum_sq / n - std::pow(sum / n, 2);
  CHECK(std::abs(var - dt) <= 0.01 * dt);
}

TEST_CASE("coarsen") {
  SUBCASE("pairs of a small sequence") {
    BrownianGrid grid;
    grid.dt_fine = 0.5;
    grid.horizon = 2.0;
    grid.noise_dim = 1;
    grid.increments = {1.0, 2.0, 3.0, 4.0};
    const BrownianGrid coarse = coarsen(grid, 2);
    REQUIRE(coarse.steps() == 2);
    CHECK(coarse.increments[0] == 3.0);
    CHECK(coarse.increments[1] == 7.0);
    CHECK(coarse.dt_fine == 1.0);
  }
  SUBCASE("factor 1 is the identity") {
    const BrownianGrid grid = brownian_grid(5, 3, 1.0, 0.25, 2);
    const BrownianGrid coarse = coarsen(grid, 1);
    for (std::size_t i = 0; i < grid.increments.size(); ++i) {
      CHECK(coarse.increments[i] == grid.increments[i]);
    }
  }
  SUBCASE("grouped sums are exact") {
    const BrownianGrid grid = brownian_grid(11, 0, 1.0, 1.0 / 64, 1);
    const BrownianGrid coarse = coarsen(grid, 8);
    for (std::int64_t j = 0; j < coarse.steps(); ++j) {
      double s = 0.0;
      for (std::int64_t k = 8 * j; k < 8 * (j + 1); ++k) s += grid.increments[static_cast<std::size_t>(k)];
      CHECK(coarse.increments[static_cast<std::size_t>(j)] == s);
    }
    // Totals agree when the fine total is taken in the same grouped order.
    Vector coarse_total = coarse.partial_sum(0, coarse.steps());
    double grouped = 0.0;
    for (std::int64_t j = 0; j < coarse.steps(); ++j) {
      grouped += coarse.increments[static_cast<std::size_t>(j)];
    }
    CHECK(coarse_total[0] == grouped);
  }
  SUBCASE("non-divisible factor is rejected") {
    const BrownianGrid grid = brownian_grid(5, 3, 1.0, 0.25, 1);
    CHECK_THROWS_AS(coarsen(grid, 3), ConfigError);
  }
}

TEST_CASE("grid construction guards") {
  CHECK_THROWS_AS(brownian_grid(1, 0, 1.0, 0.3, 1), ConfigError);
  CHECK_THROWS_AS(brownian_grid(1, 0, 1.0, -0.1, 1), ConfigError);
  CHECK_THROWS_AS(brownian_grid(1, 0, 1.0, 0.1, 0), ConfigError);
}

TEST_CASE("partial sums evaluate B(t) differences") {
  const BrownianGrid grid = brownian_grid(77, 2, 1.0, 0.125, 1);
  const Vector total = grid.partial_sum(0, 8);
  double manual = 0.0;
  for (double v : grid.increments) manual += v;
  CHECK(total[0] == doctest::Approx(manual).epsilon(1e-15));
  CHECK(grid.partial_sum(3, 3).norm() == 0.0);
}
