#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "regpath/time_grid.hpp"

using namespace regpath;

TEST_CASE("uniform time partitions") {
  SECTION("paper grid") {
    const TimePartition pt = build_uniform_partition(2048, 0.5);
    REQUIRE(pt.nodes.size() == 2049);
    REQUIRE(pt.end_time() == 0.5);
    double sum = 0.0;
    for (int m = 1; m <= pt.intervals(); ++m) sum += pt.length(m);
    REQUIRE(sum == Catch::Approx(0.5).margin(1e-12));
  }
  SECTION("single interval") {
    const TimePartition pt = build_uniform_partition(1, 0.7);
    REQUIRE(pt.nodes == std::vector<double>{0.0, 0.7});
  }
  SECTION("dual midpoints") {
    const TimePartition pt = build_uniform_partition(4, 0.5);
    REQUIRE(pt.midpoint(1) == Catch::Approx(0.0625));
    REQUIRE(pt.midpoint(2) == Catch::Approx(0.1875));
    REQUIRE(pt.midpoint(3) == Catch::Approx(0.3125));
    REQUIRE(pt.midpoint(4) == Catch::Approx(0.4375));
  }
  SECTION("rejects bad input") {
    REQUIRE_THROWS_AS(build_uniform_partition(0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(build_uniform_partition(4, 0.0), std::invalid_argument);
  }
}

TEST_CASE("quadrature against temporal bases") {
  SECTION("constants against hats give interval lengths") {
    const TimePartition pt = build_uniform_partition(8, 0.5);
    auto one = [](double) { return 1.0; };
    REQUIRE(quad_against_basis(one, pt, TimeBasis::hat, 3) ==
            Catch::Approx(0.5 / 8).margin(1e-14));
    REQUIRE(quad_against_basis(one, pt, TimeBasis::characteristic, 3) ==
            Catch::Approx(0.5 / 8).margin(1e-14));
  }
  SECTION("t against the left end hat on one interval") {
    const TimePartition pt = build_uniform_partition(1, 1.0);
    const double v = quad_against_basis([](double t) { return t; }, pt,
                                        TimeBasis::hat, 0);
    REQUIRE(v == Catch::Approx(1.0 / 6.0).margin(1e-14));
  }
  SECTION("polynomial exactness up to the rule degree") {
    const TimePartition pt = build_uniform_partition(3, 1.0);
    for (int pts = 2; pts <= 5; ++pts) {
      const int deg = 2 * pts - 1;
      // integrate t^deg against char(2) and compare with the closed form
      const double a = pt.nodes[1], b = pt.nodes[2];
      const double exact = (std::pow(b, deg + 1) - std::pow(a, deg + 1)) / (deg + 1);
      const double got = quad_against_basis(
          [deg](double t) { return std::pow(t, deg); }, pt,
          TimeBasis::characteristic, 2, pts);
      REQUIRE(got == Catch::Approx(exact).epsilon(1e-13));
    }
  }
  SECTION("hat partition of unity recovers the full integral") {
    const TimePartition pt = build_uniform_partition(5, 0.8);
    auto f = [](double t) { return 3.0 * t * t - t + 0.5; };
    double sum = 0.0;
    for (int m = 0; m <= pt.intervals(); ++m)
      sum += quad_against_basis(f, pt, TimeBasis::hat, m);
    const double exact = std::pow(0.8, 3) - 0.5 * 0.8 * 0.8 + 0.5 * 0.8;
    REQUIRE(sum == Catch::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("piecewise linear nodal evaluation") {
  const TimePartition pt = build_uniform_partition(4, 1.0);
  PiecewiseLinearScalar f{{1.0, -2.0, 0.5, 3.0, -1.0}};
  for (int m = 0; m <= 4; ++m)
    REQUIRE(f.evaluate(pt, pt.nodes[m]) == f.values[m]);
  REQUIRE(f.evaluate(pt, 0.125) == Catch::Approx(-0.5));
}
