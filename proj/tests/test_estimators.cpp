#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vtem/csv.hpp"
#include "vtem/estimators.hpp"
#include "vtem/models.hpp"

#include "test_helpers.hpp"

#include <cmath>

using namespace vtem;
using namespace vtem::testing;

TEST_CASE("log-log fit recovers exact slopes") {
  SUBCASE("half-order law is exact") {
    const std::vector<double> dts = {1.0, 0.25, 0.0625};
    std::vector<double> errs;
    for (double dt : dts) errs.push_back(std::sqrt(dt));
    const LogLogFit fit = fit_loglog(dts, errs);
    REQUIRE(fit.valid);
    CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(fit.intercept == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("fewer than three usable points is not a fit") {
    CHECK_FALSE(fit_loglog({1.0, 0.5}, {1.0, 0.7}).valid);
    CHECK_FALSE(fit_loglog({1.0, 0.5, 0.25}, {1.0, 0.0, 0.5}).valid);
  }
}

TEST_CASE("moment estimator") {
  SUBCASE("equilibrium start gives sup 0") {
    const ModelBundle cubic = example_scalar_cubic(0.5, 0.0, 0.008);
    const MomentReport report =
        estimate_moment_sup(cubic, 0.5, {0.005, 0.0025}, 0.5, 16, 11, 1);
    for (const MomentRow& row : report.rows) {
      CHECK(row.sup_moment == 0.0);
      CHECK(row.argmax_step == 0);
    }
  }
  SUBCASE("deterministic contraction puts the sup at step 0") {
    // Zero noise variant of the cubic model from x0 = 2.
    ModelBundle cubic = example_scalar_cubic(0.5, 2.0, 0.008);
    cubic.system.diffusion = [](const Vector& x) {
      return Matrix::Zero(x.size(), 1);
    };
    const MomentReport report =
        estimate_moment_sup(cubic, 0.5, {0.004}, 1.0, 8, 3, 1);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].sup_moment == doctest::Approx(2.0));  // V^rho(2) = 2
    CHECK(report.rows[0].argmax_step == 0);
    CHECK(report.rows[0].stderr_sup == 0.0);
  }
  SUBCASE("needs at least two paths") {
    const ModelBundle cubic = example_scalar_cubic();
    CHECK_THROWS_AS(estimate_moment_sup(cubic, 0.5, {0.005}, 0.1, 1, 1, 1),
                    ConfigError);
  }
}

TEST_CASE("strong error estimator") {
  const ModelBundle cubic = example_scalar_cubic(0.75, 2.0, 0.0625);
  SUBCASE("coupling identity at dt = dt_ref") {
    const ErrorReport report = estimate_strong_error(
        cubic, 1.0, {0.0625, 0.03125}, 0.03125, 1.0, 12, 5, 1);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[1].dt == 0.03125);
    CHECK(report.rows[1].mean_error == 0.0);
    CHECK(report.rows[0].mean_error > 0.0);
  }
  SUBCASE("rows are sorted by dt descending and stderr accompanies means") {
    const std::vector<double> dts = {1.0 / 64, 1.0 / 16, 1.0 / 32};
    const ErrorReport report =
        estimate_strong_error(cubic, 1.0, dts, 1.0 / 256, 1.0, 32, 7, 1);
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].dt > report.rows[1].dt);
    CHECK(report.rows[1].dt > report.rows[2].dt);
    for (const ErrorRow& row : report.rows) {
      CHECK(row.stderr_error >= 0.0);
      CHECK(row.paths == 32);
    }
  }
  SUBCASE("u-metric column appears when requested") {
    const ErrorReport report = estimate_strong_error(
        cubic, 1.0, {1.0 / 32}, 1.0 / 128, 0.5, 8, 1, 1, true);
    REQUIRE(report.rows.size() == 1);
    REQUIRE(report.rows[0].u_mean.has_value());
    // U = |x|^2, so the U-metric is the squared error here.
    CHECK(*report.rows[0].u_mean >= 0.0);
  }
  SUBCASE("dt_ref must divide every dt") {
    CHECK_THROWS_AS(
        estimate_strong_error(cubic, 1.0, {0.05}, 0.02, 1.0, 4, 1, 1),
        ConfigError);
  }
}

TEST_CASE("bitwise reproducibility across worker counts") {
  const ModelBundle cubic = example_scalar_cubic(0.75, 2.0, 0.0625);
  const std::vector<double> dts = {1.0 / 16, 1.0 / 32, 1.0 / 64};
  const ErrorReport a =
      estimate_strong_error(cubic, 1.0, dts, 1.0 / 256, 1.0, 24, 17, 1);
  const ErrorReport b =
      estimate_strong_error(cubic, 1.0, dts, 1.0 / 256, 1.0, 24, 17, 4);
  const std::string csv_a = error_report_csv(a).to_string();
  const std::string csv_b = error_report_csv(b).to_string();
  CHECK(csv_a == csv_b);
  CHECK(a.fit.slope == b.fit.slope);

  const StabilityReport sa = stability_experiment(cubic, 1.0 / 32, 2.0, 10, 3, 1.0, 1);
  const StabilityReport sb = stability_experiment(cubic, 1.0 / 32, 2.0, 10, 3, 1.0, 3);
  CHECK(stability_report_csv(sa).to_string() == stability_report_csv(sb).to_string());

  const MomentReport ma = estimate_moment_sup(cubic, 0.75, dts, 1.0, 16, 21, 1);
  const MomentReport mb = estimate_moment_sup(cubic, 0.75, dts, 1.0, 16, 21, 2);
  CHECK(moment_report_csv(ma).to_string() == moment_report_csv(mb).to_string());
}

TEST_CASE("pathwise Lyapunov slopes") {
  SUBCASE("exact geometric decay of the deterministic EM recursion") {
    // f = -x, g = 0, V = x^2, dt = 0.01: V(Z_k) = (0.99^k x0)^2.
    const double dt = 0.01;
    std::vector<double> v_series;
    double x = 1.0;
    for (int k = 0; k <= 500; ++k) {
      v_series.push_back(x * x);
      x *= 0.99;
    }
    const LyapunovSlopes slopes = estimate_lyapunov({v_series}, 1.0, dt, 0.2);
    const double expect = 2.0 * std::log(0.99) / dt;
    CHECK(slopes.pathwise[0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(expect == doctest::Approx(-2.01007).epsilon(1e-5));
    CHECK(slopes.mean_moment_slope == doctest::Approx(expect).epsilon(1e-9));
  }
  SUBCASE("constant path at the equilibrium reports the sentinel") {
    std::vector<double> zeros(100, 0.0);
    std::vector<double> alive;
    double x = 2.0;
    for (int k = 0; k < 100; ++k) {
      alive.push_back(x * x);
      x *= 0.995;
    }
    const LyapunovSlopes slopes = estimate_lyapunov({zeros, alive}, 0.5, 0.01, 0.2);
    CHECK(std::isinf(slopes.pathwise[0]));
    CHECK(slopes.pathwise[0] < 0.0);
    CHECK(std::isfinite(slopes.pathwise[1]));
  }
  SUBCASE("all paths absorbed from the start is degenerate") {
    std::vector<double> zeros(50, 0.0);
    CHECK_THROWS_AS(estimate_lyapunov({zeros, zeros}, 0.5, 0.01, 0.0),
                    DegenerateInput);
  }
  SUBCASE("burn-in fraction is bounded") {
    std::vector<double> v(50, 1.0);
    CHECK_THROWS_AS(estimate_lyapunov({v}, 0.5, 0.01, 0.95), ConfigError);
  }
}

TEST_CASE("distance to kernel") {
  DecayFunction origin;
  origin.w = [](const Vector& x) { return x.squaredNorm(); };
  origin.kernel_is_origin = true;
  CHECK(distance_to_kernel(origin, vec2(3.0, 4.0)) == doctest::Approx(5.0));
  CHECK(distance_to_kernel(origin, Vector::Zero(2)) == 0.0);

  DecayFunction circle;
  circle.w = [](const Vector& x) { return std::pow(x.norm() - 1.0, 2); };
  circle.kernel_is_origin = false;
  circle.distance = [](const Vector& x) { return std::abs(x.norm() - 1.0); };
  CHECK(distance_to_kernel(circle, vec2(2.0, 0.0)) == doctest::Approx(1.0));

  DecayFunction missing;
  missing.w = circle.w;
  missing.kernel_is_origin = false;
  CHECK_THROWS_AS(distance_to_kernel(missing, vec2(1.0, 0.0)), ConfigError);
}

TEST_CASE("stability experiment shapes and equilibrium case") {
  SUBCASE("equilibrium start converges everywhere and never diverges") {
    const ModelBundle cubic = example_scalar_cubic(0.5, 0.0, 0.008);
    const StabilityReport report =
        stability_experiment(cubic, 0.005, 1.0, 12, 5, 1.0, 1);
    CHECK(report.fraction_converged == 1.0);
    CHECK(report.divergence_fraction == 0.0);
    CHECK(report.rows.size() == 24);
  }
  SUBCASE("row layout: truncated block then classical block") {
    const ModelBundle cubic = example_scalar_cubic();
    const StabilityReport report =
        stability_experiment(cubic, 0.005, 1.0, 5, 42, 1.0, 1);
    REQUIRE(report.rows.size() == 10);
    for (int i = 0; i < 5; ++i) {
      CHECK(report.rows[static_cast<std::size_t>(i)].scheme == 0);
      CHECK(report.rows[static_cast<std::size_t>(i)].path_id == i);
      CHECK(report.rows[static_cast<std::size_t>(i + 5)].scheme == 1);
    }
    CHECK(report.radius == doctest::Approx(truncation_radius(cubic.policy, 0.005)));
  }
}

TEST_CASE("csv serialization uses 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-1.0 / 3.0) == "-0.33333333333333331");
  const double v = 110.0 * std::pow(0.008, -0.25);
  const std::string s = format_double(v);
  CHECK(std::stod(s) == v);  // round-trip exact
}
