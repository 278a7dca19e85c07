#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vtem/vtem.h"

#include <cmath>
#include <cstdio>
#include <string>

namespace {

struct Model {
  vtem_model* handle = nullptr;
  ~Model() { vtem_model_close(handle); }
};

struct Report {
  vtem_report* handle = nullptr;
  ~Report() { vtem_report_close(handle); }
};

}  // namespace

TEST_CASE("built-in model listing") {
  REQUIRE(vtem_model_count() == 3);
  bool found_cubic = false;
  for (int i = 0; i < vtem_model_count(); ++i) {
    found_cubic |= std::string(vtem_model_name(i)) == "scalar-cubic";
  }
  CHECK(found_cubic);
  CHECK(vtem_model_name(99) == nullptr);
}

TEST_CASE("open, inspect and evaluate a model") {
  Model model;
  REQUIRE(vtem_model_open("scalar-cubic", &model.handle) == VTEM_OK);
  int d = 0, m = 0;
  CHECK(vtem_model_state_dim(model.handle, &d) == VTEM_OK);
  CHECK(vtem_model_noise_dim(model.handle, &m) == VTEM_OK);
  CHECK(d == 1);
  CHECK(m == 1);
  double ds = 0.0;
  CHECK(vtem_model_delta_star(model.handle, &ds) == VTEM_OK);
  CHECK(ds == doctest::Approx(0.008));

  const double x = 1.0;
  double lv = 0.0;
  CHECK(vtem_generator(model.handle, &x, 1, &lv) == VTEM_OK);
  CHECK(lv == doctest::Approx(-2.0));
  double lvr = 0.0;
  CHECK(vtem_generator_power(model.handle, &x, 1, 0.5, &lvr) == VTEM_OK);
  CHECK(lvr == doctest::Approx(-1.5));

  double radius = 0.0;
  CHECK(vtem_truncation_radius(model.handle, 0.005, &radius) == VTEM_OK);
  CHECK(radius == doctest::Approx(std::sqrt(110.0 * std::pow(0.005, -0.25) - 1.0)));

  const double big = 30.0;
  double truncated = 0.0;
  CHECK(vtem_truncate(model.handle, 0.005, &big, 1, &truncated) == VTEM_OK);
  CHECK(truncated == doctest::Approx(radius));
}

TEST_CASE("error reporting carries messages and status codes") {
  Model model;
  CHECK(vtem_model_open("no-such", &model.handle) == VTEM_ERR_CONFIG);
  CHECK(std::string(vtem_last_error()).find("unknown model") != std::string::npos);

  REQUIRE(vtem_model_open("scalar-cubic", &model.handle) == VTEM_OK);
  double radius = 0.0;
  CHECK(vtem_truncation_radius(model.handle, 0.5, &radius) == VTEM_ERR_POLICY);
  CHECK(vtem_truncation_radius(model.handle, -1.0, &radius) == VTEM_ERR_DOMAIN);

  const double zero = 0.0;
  double out = 0.0;
  CHECK(vtem_generator_power(model.handle, &zero, 1, 0.5, &out) == VTEM_ERR_DOMAIN);

  // Dimension mismatch.
  const double xy[2] = {1.0, 2.0};
  CHECK(vtem_generator(model.handle, xy, 2, &out) == VTEM_ERR_CONFIG);
}

TEST_CASE("custom model opening") {
  Model custom;
  const double x0 = 2.0;
  REQUIRE(vtem_model_open_custom("scalar-cubic", 0.75, &x0, 1, 0.015625,
                                 &custom.handle) == VTEM_OK);
  double ds = 0.0;
  vtem_model_delta_star(custom.handle, &ds);
  CHECK(ds == doctest::Approx(0.015625));
  double got = 0.0;
  CHECK(vtem_model_default_x0(custom.handle, &got, 1) == VTEM_OK);
  CHECK(got == 2.0);

  Model bad;
  const double big = 40.0;
  CHECK(vtem_model_open_custom("scalar-cubic", 0.5, &big, 1, 0.008,
                               &bad.handle) == VTEM_ERR_VALIDATION);

  Model quartic;
  CHECK(vtem_model_open_custom("planar-quartic", 0.5, nullptr, 0,
                               std::nan(""), &quartic.handle) == VTEM_ERR_CONFIG);
}

TEST_CASE("polynomial description through the C surface") {
  Model model;
  REQUIRE(vtem_model_parse("f = -x^3; g = x; V = x^2", &model.handle) == VTEM_OK);
  const double x = 1.0;
  double lv = 0.0;
  CHECK(vtem_generator(model.handle, &x, 1, &lv) == VTEM_OK);
  CHECK(lv == doctest::Approx(-1.0));

  Model bad;
  CHECK(vtem_model_parse("f = -x^; V = x^2", &bad.handle) == VTEM_ERR_CONFIG);
}

TEST_CASE("validation through the C surface") {
  Model model;
  REQUIRE(vtem_model_open("duffing-vdp", &model.handle) == VTEM_OK);
  int passed = 0;
  char* text = nullptr;
  REQUIRE(vtem_model_validate(model.handle, &passed, &text) == VTEM_OK);
  CHECK(passed == 1);
  REQUIRE(text != nullptr);
  CHECK(std::string(text).find("pass") != std::string::npos);
  vtem_string_free(text);
}

TEST_CASE("experiments and report access") {
  Model model;
  const double start = 2.0;
  REQUIRE(vtem_model_open_custom("scalar-cubic", 0.75, &start, 1, 0.0625,
                                 &model.handle) == VTEM_OK);
  SUBCASE("converge report with summary slope") {
    const double dts[3] = {1.0 / 16, 1.0 / 32, 1.0 / 64};
    Report report;
    REQUIRE(vtem_run_converge(model.handle, dts, 3, 1.0 / 256, 1.0, 1.0, 16, 5,
                              1, 0, &report.handle) == VTEM_OK);
    CHECK(vtem_report_rows(report.handle) == 3);
    CHECK(vtem_report_columns(report.handle) == 5);
    CHECK(std::string(vtem_report_column_name(report.handle, 0)) == "dt");
    double slope = 0.0;
    CHECK(vtem_report_summary_value(report.handle, "slope", &slope) == VTEM_OK);
    double missing = 0.0;
    CHECK(vtem_report_summary_value(report.handle, "nope", &missing) ==
          VTEM_ERR_CONFIG);
    double v = 0.0;
    CHECK(vtem_report_value(report.handle, 0, 0, &v) == VTEM_OK);
    CHECK(v == dts[0]);
    CHECK(vtem_report_value(report.handle, 9, 0, &v) == VTEM_ERR_CONFIG);
  }
  SUBCASE("path report matches the column contract") {
    Report report;
    REQUIRE(vtem_run_path(model.handle, 0, 0.0625, 1.0, nullptr, 0, 3, 0,
                          &report.handle) == VTEM_OK);
    CHECK(vtem_report_rows(report.handle) == 17);
    REQUIRE(vtem_report_columns(report.handle) == 5);
    CHECK(std::string(vtem_report_column_name(report.handle, 2)) == "y_1");
    CHECK(std::string(vtem_report_column_name(report.handle, 4)) == "truncated");
  }
  SUBCASE("csv writing") {
    Report report;
    const double dts[1] = {1.0 / 32};
    REQUIRE(vtem_run_moments(model.handle, 0.75, dts, 1, 1.0, 8, 3, 1,
                             &report.handle) == VTEM_OK);
    const char* path = "/tmp/vtem_capi_test.csv";
    REQUIRE(vtem_report_write_csv(report.handle, path) == VTEM_OK);
    std::FILE* f = std::fopen(path, "rb");
    REQUIRE(f != nullptr);
    char header[64] = {0};
    REQUIRE(std::fgets(header, sizeof(header), f) != nullptr);
    std::fclose(f);
    CHECK(std::string(header).rfind("dt,sup_moment,argmax_step", 0) == 0);
    std::remove(path);
  }
  SUBCASE("stability report summaries") {
    Report report;
    REQUIRE(vtem_run_stability(model.handle, 0.03125, 2.0, 6, 9, 1.0, 1,
                               &report.handle) == VTEM_OK);
    CHECK(vtem_report_rows(report.handle) == 12);
    double radius = 0.0;
    CHECK(vtem_report_summary_value(report.handle, "radius", &radius) == VTEM_OK);
    CHECK(radius > 0.0);
  }
}
