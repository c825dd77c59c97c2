#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "kinklab/bessel.hpp"

using namespace kinklab;
using Catch::Matchers::WithinAbs;

TEST_CASE("Bessel row matches the standard library at moderate arguments", "[bessel]") {
  for (double x : {0.5, 5.0, 40.0}) {
    const Eigen::VectorXd row = bessel_j_row(x, 60);
    for (int d = 0; d <= 60; ++d)
      REQUIRE_THAT(row(d), WithinAbs(std::cyl_bessel_j(d, x), 1e-12));
  }
}

TEST_CASE("Bessel row at x = 0 is a delta", "[bessel]") {
  const Eigen::VectorXd row = bessel_j_row(0.0, 10);
  REQUIRE(row(0) == 1.0);
  for (int d = 1; d <= 10; ++d) REQUIRE(row(d) == 0.0);
}

TEST_CASE("probability sum rule holds at large argument", "[bessel]") {
  // sum_{d in Z} J_d(x)^2 = 1, i.e. J_0^2 + 2 sum_{d>=1} J_d^2 = 1.
  const double x = 2000.0;
  const Eigen::VectorXd row = bessel_j_row(x, 2200);
  double sum = row(0) * row(0);
  for (int d = 1; d <= 2200; ++d) sum += 2.0 * row(d) * row(d);
  REQUIRE_THAT(sum, WithinAbs(1.0, 1e-12));
}

TEST_CASE("orders beyond the turning point decay superexponentially", "[bessel]") {
  const Eigen::VectorXd row = bessel_j_row(100.0, 180);
  REQUIRE(std::abs(row(140)) < 1e-10);
  REQUIRE(std::abs(row(180)) < 1e-25);
}

TEST_CASE("tiny arguments fall back to the delta kernel", "[bessel]") {
  const Eigen::VectorXd row = bessel_j_row(1e-200, 5);
  REQUIRE(row(0) == 1.0);
  REQUIRE_THAT(row(1), WithinAbs(0.5e-200, 1e-215));
}
