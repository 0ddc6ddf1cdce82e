#include "helpers.hpp"
#include "lindyn/oracle.hpp"
#include "lindyn/special_fn.hpp"

#include <numbers>

using namespace lindyn;

// reference values from a 40-digit mpmath evaluation
TEST_CASE("Ei frozen values") {
  const std::pair<double, double> ref[] = {
      {-10, -4.1569689296853243e-6}, {-1, -0.21938393439552027}, {-0.1, -1.8229239584193907},
      {0.1, -1.6228128139692767},    {1, 1.8951178163559368},    {5, 40.185275355803177},
      {6, 85.989762142439205},       {10, 2492.2289762418778},   {30, 368973209407.2742}};
  for (auto [x, v] : ref) {
    CAPTURE(x);
    CHECK(rel_diff(expint_ei(x), v) < 1e-13);
    CHECK(rel_diff(oracle::ei_series(x), v) < 1e-14);
  }
}

TEST_CASE("erf frozen values") {
  const std::pair<double, double> ref[] = {{0.1, 0.11246291601828489}, {0.5, 0.52049987781304654},
                                           {1, 0.84270079294971487},   {2, 0.99532226501895273},
                                           {3, 0.99997790950300141}};
  for (auto [x, v] : ref) {
    CAPTURE(x);
    CHECK(rel_diff(lindyn::erf(x), v) < 1e-15);
    CHECK(rel_diff(lindyn::erf(-x), -v) < 1e-15);
    CHECK(rel_diff(oracle::erf_series(x), v) < 1e-15);
  }
}

TEST_CASE("Ei derivative by finite differences, 50 points") {
  for (int i = 0; i < 50; ++i) {
    const double x = i < 25 ? -10.0 + 9.9 * i / 24.0 : 0.1 + 4.9 * (i - 25) / 24.0;
    const double h = 1e-5 * std::max(1.0, std::abs(x));
    const double fd = (expint_ei(x + h) - expint_ei(x - h)) / (2 * h);
    CAPTURE(x);
    CHECK(rel_diff(fd, std::exp(x) / x) < 1e-6);
  }
}

TEST_CASE("erf derivative by finite differences") {
  for (int i = 0; i < 50; ++i) {
    const double x = -3.0 + 6.0 * i / 49.0, h = 1e-4;
    const double fd = (lindyn::erf(x + h) - lindyn::erf(x - h)) / (2 * h);
    CHECK(rel_diff(fd, 2 / std::sqrt(std::numbers::pi) * std::exp(-x * x)) < 1e-6);
  }
}

TEST_CASE("Ei continuity across the series / asymptotic crossover") {
  for (double x : {-6.0, 6.0}) {
    const double a = expint_ei(std::nextafter(x, 0.0)), b = expint_ei(std::nextafter(x, 2 * x));
    CHECK(rel_diff(a, b) < 1e-13);
  }
}

TEST_CASE("Ei domain") { CHECK_THROWS_AS((void)expint_ei(0.0), DomainError); }

TEST_CASE("entire part and differences") {
  CHECK(ei_entire(0.0) == 0.0);
  for (double x : {1e-6, 0.3, 2.0, 15.0})
    CHECK(std::abs(ei_entire(x) - (expint_ei(-x) - std::log(x) - euler_gamma)) < 1e-14 * (std::abs(std::log(x)) + 1));
  CHECK(rel_diff(ei_entire(1e-6), -1e-6 + 0.25e-12) < 1e-12);
  CHECK(rel_diff(ei_neg_diff(0.5, 3.0), expint_ei(-0.5) - expint_ei(-3.0)) < 1e-14);
  // nearby small arguments: ln(b/a) dominates, no cancellation
  CHECK(rel_diff(ei_neg_diff(1e-9, 2e-9), std::log(0.5) + (ei_entire(1e-9) - ei_entire(2e-9))) < 1e-14);
  CHECK(erf_over_x(0.0) == 2.0);
  CHECK(rel_diff(erf_over_x(1e-5), std::sqrt(std::numbers::pi) * lindyn::erf(1e-5) / 1e-5) < 1e-14);
}
