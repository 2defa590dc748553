#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "bbans/discretization.hpp"
#include "bbans/errors.hpp"
#include "bbans/numerics.hpp"

using namespace bbans;

TEST_CASE("p = 1 grid") {
  const auto grid = build_grid(1);
  CHECK(grid.size() == 2);
  CHECK(grid.boundary(0) == -std::numeric_limits<double>::infinity());
  CHECK(grid.boundary(1) == 0.0);
  CHECK(grid.boundary(2) == std::numeric_limits<double>::infinity());
  CHECK(grid.representative(0) == doctest::Approx(-0.67448975019608174).epsilon(1e-14));
  CHECK(grid.representative(1) == doctest::Approx(0.67448975019608174).epsilon(1e-14));
  const std::vector<std::uint32_t> idx{0};
  CHECK(index_to_latent(grid, idx)[0] == doctest::Approx(-0.6745).epsilon(1e-4));
}

TEST_CASE("p = 4 grid has 16 equal-mass buckets") {
  const auto grid = build_grid(4);
  CHECK(grid.size() == 16);
  for (std::size_t i = 0; i < 16; ++i)
    CHECK(normal_cdf(grid.boundary(i + 1)) - normal_cdf(grid.boundary(i)) ==
          doctest::Approx(1.0 / 16).epsilon(1e-12));
}

TEST_CASE("grid invariants for every precision") {
  for (unsigned p = 1; p <= kMaxLatentPrecision; ++p) {
    CAPTURE(p);
    const DiscretizationGrid grid(p);
    const double mass = std::ldexp(1.0, -static_cast<int>(p));
    // Full sweep for small grids, strided probes for large ones.
    const std::size_t stride = p <= 12 ? 1 : (grid.size() >> 12) + 7;
    for (std::size_t i = 0; i < grid.size(); i += stride) {
      const double lo = grid.boundary(i), hi = grid.boundary(i + 1), y = grid.representative(i);
      REQUIRE(lo < hi);
      REQUIRE(lo < y);
      REQUIRE(y < hi);
      REQUIRE(std::fabs(normal_cdf(hi) - normal_cdf(lo) - mass) <= 1e-9);
      REQUIRE(std::fabs(grid.representative(grid.size() - 1 - i) + y) <= 1e-9);
    }
    CHECK(grid.boundary(grid.size()) == std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(grid.boundary(grid.size() + 1), IndexOutOfRange);
    CHECK_THROWS_AS(grid.representative(grid.size()), IndexOutOfRange);
  }
}

TEST_CASE("grids are reproducible from p alone") {
  const DiscretizationGrid a(16), b(16);
  for (std::size_t i = 0; i <= a.size(); i += 1023) CHECK(a.boundary(i) == b.boundary(i));
  const DiscretizationGrid c(20), d(20);
  for (std::size_t i = 0; i < c.size(); i += 4099) CHECK(c.representative(i) == d.representative(i));
}

TEST_CASE("index_to_latent") {
  const DiscretizationGrid grid(16);
  const std::vector<std::uint32_t> idx{1u << 15, 0, 65535};
  const Eigen::VectorXd y = index_to_latent(grid, idx);
  REQUIRE(y.size() == 3);
  CHECK(std::fabs(y[0]) < 1e-4);
  CHECK(y[0] == grid.representative(1u << 15));
  CHECK(y[1] == doctest::Approx(-y[2]).epsilon(1e-12));
  const std::vector<std::uint32_t> bad{65536};
  CHECK_THROWS_AS(index_to_latent(grid, bad), IndexOutOfRange);
}

TEST_CASE("precision range") {
  CHECK_THROWS_AS(DiscretizationGrid(0), std::invalid_argument);
  CHECK_THROWS_AS(DiscretizationGrid(25), std::invalid_argument);
}
