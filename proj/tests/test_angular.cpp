#include "splab/angular.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <random>

using namespace splab;

TEST_CASE("angular constants") {
  AngularRule<double> rule(256);
  CHECK(std::abs(cp_constant(1.0, rule) - 2.0) <= 1e-10);
  CHECK(std::abs(cp_constant(3.0, rule) - 6.0) <= 1e-10);
  // The integrand has a |cos|^{p+1} cusp, so the rule converges like m^{-(p+2)}.
  for (double p : {1.5, 2.0, 2.5, 3.5, 4.0, 4.9, 5.0})
    CHECK(cp_constant(p, rule) == doctest::Approx(oracle::cp_closed_form(p)).epsilon(1e-8));
  for (double p : {0.5, 1.1}) {
    CHECK(cp_constant(p, rule) == doctest::Approx(oracle::cp_closed_form(p)).epsilon(1e-6));
    CHECK(cp_constant(p, AngularRule<double>(4096)) == doctest::Approx(oracle::cp_closed_form(p)).epsilon(1e-9));
  }
  for (double p : {1.5, 2.0, 2.5, 3.0, 4.0, 4.9}) CHECK(cp_constant(p, rule) > std::pow(2.0, (p + 1) / 2));
}

TEST_CASE("rule validation") {
  CHECK_THROWS(AngularRule<double>(32));
  CHECK_THROWS(AngularRule<double>(257));
  CHECK_THROWS(angular_density(1.0, 1.0, 6.0, AngularRule<double>(64)));
}

TEST_CASE("closed forms") {
  AngularRule<double> rule(256);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-3, 3);
  for (int k = 0; k < 200; ++k) {
    const double a = U(rng), b = U(rng);
    REQUIRE(std::abs(angular_force(a, b, 3.0, rule) - a * (a * a + 2 * b * b)) <= 1e-10 * (1 + std::pow(std::abs(a) + std::abs(b), 3)));
    REQUIRE(std::abs(angular_force(a, b, 1.0, rule) - a) <= 1e-12 * (1 + std::abs(a)));
    REQUIRE(angular_density(a, b, 1.0, rule) == doctest::Approx(a * a + b * b).epsilon(1e-12));
    REQUIRE(angular_density(a, 0.0, 2.5, rule) == doctest::Approx(std::pow(std::abs(a), 3.5)).epsilon(1e-12));
  }
}

TEST_CASE("symmetries and homogeneity") {
  AngularRule<double> rule(256);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-2, 2), T(0.1, 3);
  for (double p : {1.5, 2.0, 2.5, 4.0}) {
    for (int k = 0; k < 50; ++k) {
      const double a = U(rng), b = U(rng), t = T(rng);
      const double N = angular_density(a, b, p, rule);
      REQUIRE(angular_density(b, a, p, rule) == doctest::Approx(N).epsilon(1e-12));
      REQUIRE(angular_density(-a, b, p, rule) == doctest::Approx(N).epsilon(1e-12));
      REQUIRE(angular_density(t * a, t * b, p, rule) == doctest::Approx(std::pow(t, p + 1) * N).epsilon(1e-11));
      REQUIRE(angular_force(-a, b, p, rule) == doctest::Approx(-angular_force(a, b, p, rule)).epsilon(1e-12));
    }
  }
}

TEST_CASE("force is the scaled derivative of the density") {
  AngularRule<double> rule(256);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.2, 2);
  for (double p : {1.5, 2.0, 3.0, 4.5}) {
    for (int k = 0; k < 30; ++k) {
      const double a = U(rng), b = U(rng), e = 1e-5;
      const double fd = (angular_density(a + e, b, p, rule) - angular_density(a - e, b, p, rule)) / (2 * e) / (p + 1);
      REQUIRE(angular_force(a, b, p, rule) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("Hessian is the Jacobian of the force pair") {
  AngularRule<double> rule(256);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(0.2, 2);
  for (double p : {1.5, 2.5, 3.0}) {
    for (int k = 0; k < 30; ++k) {
      const double a = U(rng), b = U(rng), e = 1e-5;
      auto h = angular_hessian(a, b, p, rule);
      const double d11 = (angular_force(a + e, b, p, rule) - angular_force(a - e, b, p, rule)) / (2 * e);
      const double d12 = (angular_force(a, b + e, p, rule) - angular_force(a, b - e, p, rule)) / (2 * e);
      const double d22 = (angular_force(b + e, a, p, rule) - angular_force(b - e, a, p, rule)) / (2 * e);
      REQUIRE(h.H(0, 0) == doctest::Approx(d11).epsilon(1e-6));
      REQUIRE(h.H(0, 1) == doctest::Approx(d12).epsilon(1e-6));
      REQUIRE(h.H(1, 0) == h.H(0, 1));
      REQUIRE(h.H(1, 1) == doctest::Approx(d22).epsilon(1e-6));
    }
  }
}

TEST_CASE("degenerate Hessian is flagged when the modulus vanishes") {
  AngularRule<double> rule(256);
  CHECK(angular_hessian(1.0, 1.0, 1.5, rule).degenerate);
  CHECK_FALSE(angular_hessian(1.0, 0.5, 1.5, rule).degenerate);
  CHECK_FALSE(angular_hessian(1.0, 1.0, 3.0, rule, 0.0).H.hasNaN());
}
