#include "spdesens/spectral.hpp"

#include <doctest.h>


#include <cmath>
#include <random>

using namespace spdesens;

TEST_CASE("semigroup at tau = 0 is the identity") {
  const SpectralOperator op = SpectralOperator::quadratic(5, 0.7);
  StateVector x(5);
  x << 1.5, -2, 0.25, 3, -7;
  const StateVector y = semigroup_apply(op, 0.0, x);
  for (int k = 0; k < 5; ++k) CHECK(y[k] == x[k]);
}

TEST_CASE("semigroup closed form") {
  const SpectralOperator op({1.0, 2.0});
  const StateVector y = semigroup_apply(op, std::log(2.0), StateVector::Ones(2));
  CHECK(y[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(0.25).epsilon(1e-15));

  const SpectralOperator three({3.0});
  const StateVector z = semigroup_apply(three, 10.0, StateVector::Ones(1));
  CHECK(z[0] == doctest::Approx(std::exp(-30.0)).epsilon(1e-14));
  CHECK(hilbert_norm(z) <= 1.0);
}

TEST_CASE("quadratic spectrum is c k^2") {
  const auto op = SpectralOperator::quadratic(4, 0.5);
  const std::vector<double> expected{0.5, 2.0, 4.5, 8.0};
  CHECK(op.eigenvalues() == expected);
  CHECK(op.dim() == 4);
}

// lambda * tau <= 43 on this spectrum.
TEST_CASE("semigroup law and contraction on random data") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto op = SpectralOperator::quadratic(6, 0.3);
  for (int trial = 0; trial < 200; ++trial) {
    StateVector x(6);
    for (int k = 0; k < 6; ++k) x[k] = g(rng);
    const double t1 = u(rng);
    const double t2 = u(rng);
    const StateVector two_step = semigroup_apply(op, t1, semigroup_apply(op, t2, x));
    const StateVector one_step = semigroup_apply(op, t1 + t2, x);
    for (int k = 0; k < 6; ++k) {
      const double scale = std::max(std::abs(one_step[k]), 1e-300);
      CHECK(std::abs(two_step[k] - one_step[k]) / scale <= 1e-14);
    }
    CHECK(hilbert_norm(semigroup_apply(op, t1, x)) <= hilbert_norm(x) * (1.0 + 1e-15));
  }
}

TEST_CASE("hilbert norm") {
  CHECK(hilbert_norm(StateVector::Zero(3)) == 0.0);
  StateVector a(2);
  a << 3, 4;
  CHECK(hilbert_norm(a) == 5.0);
  CHECK(hilbert_norm(StateVector::Ones(4)) == 2.0);
}

TEST_CASE("invalid spectra and arguments are rejected") {
  CHECK_THROWS_AS(SpectralOperator(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(SpectralOperator({1.0, -0.1}), std::invalid_argument);
  CHECK_THROWS_AS(SpectralOperator({NAN}), std::invalid_argument);
  const SpectralOperator op({1.0, 2.0});
  CHECK_THROWS(op.decay_factors(-1.0));
  CHECK_THROWS(semigroup_apply(op, 1.0, StateVector::Ones(3)));
}

TEST_CASE("zero spectrum reduces to the identity flow") {
  const SpectralOperator op({0.0, 0.0});
  const StateVector y = semigroup_apply(op, 5.0, StateVector::Ones(2));
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 1.0);
}
