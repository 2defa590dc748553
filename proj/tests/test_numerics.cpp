#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "bbans/numerics.hpp"

using bbans::log_gamma;
using bbans::normal_cdf;
using bbans::normal_quantile;

// Reference values: tests/oracle/enumerate_oracle.py (mpmath, 100 digits).

TEST_CASE("normal_cdf matches high-precision reference") {
  struct Case { double z, expected; };
  const Case cases[] = {
      {-10.0, 7.6198530241605261e-24}, {-7.0, 1.279812543885835e-12},
      {-3.0, 0.0013498980316300945},   {-1.0, 0.15865525393145705},
      {-0.5, 0.3085375387259869},      {0.0, 0.5},
      {0.3, 0.61791142218895263},      {1.0, 0.84134474606854295},
      {2.5, 0.99379033467422386},      {7.5, 0.99999999999996809},
      {9.0, 1.0},
  };
  for (const auto& c : cases) {
    CAPTURE(c.z);
    CHECK(std::fabs(normal_cdf(c.z) - c.expected) <= 1e-15);
    if (c.expected > 0.0 && c.expected < 1e-3)
      CHECK(std::fabs(normal_cdf(c.z) / c.expected - 1.0) <= (c.z < -5.0 ? 1e-8 : 1e-13));
  }
  CHECK(normal_cdf(-38.0) == 0.0);
  CHECK(normal_cdf(-std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(normal_cdf(std::numeric_limits<double>::infinity()) == 1.0);
}

TEST_CASE("normal_cdf is monotone, including across its branch points") {
  double prev = 0.0;
  for (double z = -40.0; z <= 40.0; z += 1.0 / 4096) {
    const double v = normal_cdf(z);
    REQUIRE(v >= prev);
    prev = v;
  }
  for (double branch : {-7.07106781186547, 7.07106781186547, -37.0, 37.0, 0.0}) {
    double z = branch;
    for (int k = 0; k < 64; ++k) z = std::nextafter(z, -100.0);
    double last = normal_cdf(z);
    for (int k = 0; k < 128; ++k) {
      z = std::nextafter(z, 100.0);
      const double v = normal_cdf(z);
      REQUIRE(v >= last);
      last = v;
    }
  }
}

TEST_CASE("normal_quantile matches high-precision reference") {
  struct Case { double p, expected; };
  const Case cases[] = {
      {0.25, -0.67448975019608174},       {1e-20, -9.2623400897984076},
      {1e-10, -6.3613409024040562},       {0.02425, -1.9729610513118848},
      {0.3, -0.52440051270804082},        {0.925, 1.4395314709384562},
      {0.999, 3.0902323061678133},        {1.0 - 0x1.0p-24, 5.2947040848545981},
  };
  for (const auto& c : cases) {
    CAPTURE(c.p);
    CHECK(std::fabs(normal_quantile(c.p) - c.expected) <= 1e-14 * std::max(1.0, std::fabs(c.expected)));
  }
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.0) == -std::numeric_limits<double>::infinity());
  CHECK(normal_quantile(1.0) == std::numeric_limits<double>::infinity());
  CHECK(std::isnan(normal_quantile(1.5)));
}

TEST_CASE("normal_cdf inverts normal_quantile") {
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    CHECK(std::fabs(normal_cdf(normal_quantile(p)) - p) <= 2e-15);
  }
}

TEST_CASE("log_gamma matches high-precision reference") {
  struct Case { double x, expected; };
  const Case cases[] = {
      {0.1, 2.252712651734205902},     {0.5, 0.57236494292470008707},
      {1.5, -0.12078223763524522235},  {3.7, 1.4280723266653881292},
      {10.0, 12.801827480081469611},   {100.25, 360.28455963776423497},
      {1e6, 12815504.56914761166},
  };
  for (const auto& c : cases) {
    CAPTURE(c.x);
    CHECK(std::fabs(log_gamma(c.x) - c.expected) <= 1e-13 * std::max(1.0, std::fabs(c.expected)));
  }
  CHECK(log_gamma(1.0) == 0.0);
  CHECK(log_gamma(2.0) == 0.0);
  // Integer arguments: log((n-1)!).
  double log_fact = 0.0;
  for (int n = 2; n < 200; ++n) {
    log_fact += std::log(static_cast<double>(n - 1));
    CHECK(std::fabs(log_gamma(n) - log_fact) <= 1e-12 * std::max(1.0, log_fact));
  }
  CHECK(std::isnan(log_gamma(0.0)));
}
