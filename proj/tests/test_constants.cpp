// Gamma-function machinery and the closed-form estimate constants, checked
// against identities and independent hand evaluations.

#include "hypbq/constants.hpp"
#include "hypbq/semigroup.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace hypbq;

TEST_CASE("gamma function hits known values and the recurrence") {
  CHECK(gamma_fn(1.0) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(gamma_fn(0.5) == Catch::Approx(std::sqrt(M_PI)).epsilon(1e-12));
  CHECK(gamma_fn(5.0) == Catch::Approx(24.0).epsilon(1e-12));
  CHECK(gamma_fn(0.25) == Catch::Approx(3.6256099082219083).epsilon(1e-12));

  for (double x : {0.1, 0.37, 0.75, 1.5, 3.2, 7.9}) {
    CHECK(gamma_fn(x + 1.0) == Catch::Approx(x * gamma_fn(x)).epsilon(1e-10));
  }
  // reflection formula
  for (double x : {0.3, 0.45, 0.8}) {
    CHECK(gamma_fn(x) * gamma_fn(1.0 - x) ==
          Catch::Approx(M_PI / std::sin(M_PI * x)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gamma_fn(0.0), std::invalid_argument);
  CHECK_THROWS_AS(gamma_fn(-1.5), std::invalid_argument);
}

TEST_CASE("lower incomplete gamma interpolates between 0 and the full gamma") {
  CHECK(lower_incomplete_gamma(0.5, 0.0) == 0.0);
  // gamma(1, x) = 1 - e^{-x}
  for (double x : {0.2, 1.0, 4.0, 9.0}) {
    CHECK(lower_incomplete_gamma(1.0, x) ==
          Catch::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
  }
  // saturates to Gamma(a); monotone in x across the series/fraction split
  for (double a : {0.25, 0.5, 1.7, 3.0}) {
    CHECK(lower_incomplete_gamma(a, 50.0) == Catch::Approx(gamma_fn(a)).epsilon(1e-10));
    double prev = 0.0;
    for (double x : {0.1, 0.5, a + 0.9, a + 1.1, 5.0, 20.0}) {
      const double cur = lower_incomplete_gamma(a, x);
      CHECK(cur >= prev);
      prev = cur;
    }
  }
  CHECK_THROWS_AS(lower_incomplete_gamma(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(lower_incomplete_gamma(0.5, -1.0), std::invalid_argument);
}

TEST_CASE("coupling constant N matches the hand evaluation at the reference point") {
  // d=2, p=4, delta_d=1: beta = gamma_{4/3,4} = 1/2, theta = 1/2,
  // N = sqrt(2) sqrt(pi) + 2 = 4.506628...
  const double beta = gamma_pq(4.0 / 3.0, 4.0, 1.0);
  CHECK(beta == Catch::Approx(0.5).epsilon(1e-14));
  const double N = bound_N(1.0, 4.0, beta, 2);
  CHECK(N == Catch::Approx(std::sqrt(2.0 * M_PI) + 2.0).epsilon(1e-12));
  CHECK(N == Catch::Approx(4.5066).margin(1e-3));

  CHECK_THROWS_AS(bound_N(1.0, 2.0, 0.5, 2), std::invalid_argument);
  CHECK_THROWS_AS(bound_N(1.0, 4.0, 0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(bound_N(1.0, 4.0, -1.0, 2), std::invalid_argument);
}

TEST_CASE("bilinear constant M matches the hand evaluation at the reference point") {
  // d=2, p=4, delta_d=1: beta~ = (3/4 + 5/8)/2 = 11/16, theta~ = 3/4,
  // M = (11/16)^{-1/4} Gamma(1/4) + 16/11 = 5.4362...
  const double bt = 0.5 * (gamma_pq(4.0, 4.0, 1.0) + gamma_pq(2.0, 4.0, 1.0));
  CHECK(bt == Catch::Approx(11.0 / 16.0).epsilon(1e-14));
  const double M = bound_M(1.0, 4.0, 2, bt);
  const double hand =
      std::pow(11.0 / 16.0, -0.25) * gamma_fn(0.25) + 16.0 / 11.0;
  CHECK(M == Catch::Approx(hand).epsilon(1e-12));
  CHECK(M == Catch::Approx(5.437).margin(1e-3));

  CHECK_THROWS_AS(bound_M(1.0, 2.0, 2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(bound_M(1.0, 3.0, 3, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(bound_M(1.0, 4.0, 2, 0.0), std::invalid_argument);
}

TEST_CASE("estimate constants respond monotonically to the decay rate") {
  // both closed forms blow up as the available exponential rate shrinks
  CHECK(bound_N(1.0, 4.0, 0.3, 2) > bound_N(1.0, 4.0, 0.6, 2));
  CHECK(bound_M(1.0, 4.0, 2, 0.3) > bound_M(1.0, 4.0, 2, 0.6));
  // and grow with the semigroup constant
  CHECK(bound_N(2.0, 4.0, 0.5, 2) > bound_N(1.0, 4.0, 0.5, 2));
  CHECK(bound_M(2.0, 4.0, 2, 0.5) > bound_M(1.0, 4.0, 2, 0.5));
}

TEST_CASE("near-critical flag trips just above the scaling line") {
  CHECK(near_critical(2.04, 2));
  CHECK(near_critical(3.01, 3));
  CHECK_FALSE(near_critical(4.0, 2));
  CHECK_FALSE(near_critical(3.06, 3));
}

TEST_CASE("decay prefactor c_delta reduces to M at zero data and grows with delta") {
  const ConeExponents e{0.5, 0.75};
  const double M = 5.4362;
  CHECK(c_delta(M, 0.0, 1.0, 0.5, 0.0, 0.0, e) == Catch::Approx(M).epsilon(1e-14));

  const double c1 = c_delta(M, 1e-3, 1.0, 0.5, 0.05, 1e-3, e);
  const double c2 = c_delta(M, 1e-3, 1.0, 0.5, 0.20, 1e-3, e);
  CHECK(c1 >= M);
  CHECK(c2 > c1);

  CHECK_THROWS_AS(c_delta(M, 0.0, 1.0, 0.5, 0.5, 0.0, e), std::invalid_argument);
  CHECK_THROWS_AS(c_delta(M, 0.0, 1.0, 0.5, -0.1, 0.0, e), std::invalid_argument);
  // large data kills the denominator
  CHECK_THROWS_AS(c_delta(M, 10.0, 1.0, 0.5, 0.05, 0.0, e), std::domain_error);
}
