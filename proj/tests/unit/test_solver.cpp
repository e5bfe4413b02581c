#include "spdesens/problem.hpp"
#include "spdesens/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace spdesens;

namespace {

double max_rel(const PathSample& a, const PathSample& b) {
  const double scale = std::max(a.values().cwiseAbs().maxCoeff(), 1e-300);
  return (a.values() - b.values()).cwiseAbs().maxCoeff() / scale;
}

struct Moments {
  double mean;
  double mean_se;
  double var;
  double var_se;
};

Moments moments(const std::vector<double>& xs) {
  const double M = static_cast<double>(xs.size());
  double m = 0.0;
  for (double x : xs) m += x;
  m /= M;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : xs) {
    const double c = (x - m) * (x - m);
    m2 += c;
    m4 += c * c;
  }
  m2 /= M;
  m4 /= M;
  return {m, std::sqrt(m2 / M), m2, std::sqrt((m4 - m2 * m2) / M)};
}

}  // namespace

TEST_CASE("free flow is exact at every grid point") {
  const auto pr = fixtures::free_flow(16, 0.05, 1.0, 0.01);
  const auto noise = pr.noise(0);
  const auto path = solve_mild(pr.op, pr.coefficients, pr.u0, noise);
  REQUIRE_FALSE(path.blown_up());
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double t = path.times()[i];
    for (Eigen::Index k = 0; k < 16; ++k) {
      const double exact = std::exp(-pr.op.eigenvalues()[static_cast<std::size_t>(k)] * t) * pr.u0[k];
      CHECK(std::abs(path.value(i)[k] - exact) <= 1e-14 * std::abs(pr.u0[k]));
    }
  }
}

TEST_CASE("zero data and zero coefficients stay at zero") {
  auto pr = fixtures::free_flow(4, 1.0, 1.0, 0.1);
  pr.u0.setZero();
  const auto path = solve_mild(pr.op, pr.coefficients, pr.u0, pr.noise(3));
  CHECK(path.values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("OU with jumps: mean and variance of u(T)") {
  const double sigma = 0.5;
  const double c = 0.3;
  const double lambda = 2.0;
  const double T = 1.0;
  const auto pr = fixtures::ou_with_jumps(sigma, c, lambda, T, 1e-3, 1.0);
  std::vector<double> xs;
  for (std::uint64_t m = 0; m < 10000; ++m) {
    const auto path = solve_mild(pr.op, pr.coefficients, pr.u0, pr.noise(m));
    xs.push_back(path.value(path.size() - 1)[0]);
  }
  const auto mo = moments(xs);
  const double mean = std::exp(-T);
  const double var = (sigma * sigma + lambda * c * c) * (1.0 - std::exp(-2.0 * T)) / 2.0;
  CHECK(std::abs(mo.mean - mean) <= 3.0 * mo.mean_se);
  CHECK(std::abs(mo.var - var) <= 3.0 * mo.var_se);
}

TEST_CASE("compensated jump convolution is centred") {
  const auto pr = fixtures::compensated_jumps(3.0, 1.0, 0.01);
  std::vector<double> xs;
  for (std::uint64_t m = 0; m < 10000; ++m) {
    const auto path = solve_mild(pr.op, pr.coefficients, pr.u0, pr.noise(m));
    xs.push_back(path.value(path.size() - 1)[0]);
  }
  const auto mo = moments(xs);
  CHECK(std::abs(mo.mean) <= 3.0 * mo.mean_se);
}

TEST_CASE("linear fixture: the scheme is affine in the initial datum") {
  const auto pr = fixtures::linear(4);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (std::uint64_t m = 0; m < 5; ++m) {
    const auto noise = pr.noise(m);
    StateVector h(4);
    for (int k = 0; k < 4; ++k) h[k] = g(rng);
    const auto sys = solve_system(pr.op, pr.coefficients, pr.u0, {h}, noise);
    for (double eps : {1e-3, 0.1, 1.0, 10.0}) {
      const auto moved = solve_mild(pr.op, pr.coefficients, pr.u0 + eps * h,
                                    scale_direction_pairing(noise));
      const auto diff = path_difference(moved, sys.base);
      const Eigen::MatrixXd expected = eps * sys.path(1).values();
      const double scale = std::max(expected.cwiseAbs().maxCoeff(), moved.values().cwiseAbs().maxCoeff());
      CHECK((diff.values() - expected).cwiseAbs().maxCoeff() / scale <= 1e-12);
    }
  }
}

TEST_CASE("zero directions give zero sensitivities") {
  const auto pr = fixtures::nemytskii(4, 0.5, 4);
  const StateVector zero = StateVector::Zero(4);
  const auto sys = solve_system(pr.op, pr.coefficients, pr.u0, {zero, zero, zero}, pr.noise(0));
  for (SubsetMask m = 1; m <= sys.full_mask(); ++m) {
    CHECK(sys.path(m).values().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("affine coefficients have vanishing second variation") {
  const auto pr = fixtures::linear(3);
  const auto sys = solve_system(pr.op, pr.coefficients, pr.u0,
                                {StateVector::Ones(3), StateVector::Constant(3, -0.5)}, pr.noise(1));
  CHECK(sys.path(0b11).values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("second-order system is symmetric under direction swap") {
  const auto pr = fixtures::nemytskii(5, 0.8, 4);
  StateVector h(5);
  StateVector k(5);
  h << 1, -0.3, 0.2, 0.7, -1;
  k << 0.1, 0.4, -0.9, 0.3, 0.5;
  const auto noise = pr.noise(2);
  const auto a = solve_system(pr.op, pr.coefficients, pr.u0, {h, k}, noise);
  const auto b = solve_system(pr.op, pr.coefficients, pr.u0, {k, h}, noise);
  CHECK(max_rel(a.path(0b11), b.path(0b11)) <= 1e-12);
  CHECK(max_rel(a.path(0b01), b.path(0b10)) == 0.0);
}

TEST_CASE("order one reduces to the mild solve plus one variational solve") {
  const auto pr = fixtures::nemytskii(3, 0.6, 4);
  const auto noise = pr.noise(4);
  const StateVector h = StateVector::Constant(3, 0.3);
  const auto sys = solve_system(pr.op, pr.coefficients, pr.u0, {h}, noise);
  const auto base = solve_mild(pr.op, pr.coefficients, pr.u0, noise);
  CHECK(sys.base.values() == base.values());
  const auto y = solve_variational(pr.op, pr.coefficients, sys, 1, noise);
  CHECK(sys.path(1).values() == y.values());
  CHECK(y.value(0) == h);
}

TEST_CASE("left limits at jumps") {
  const auto pr = fixtures::compensated_jumps(5.0, 1.0, 0.01);
  const auto noise = pr.noise(7);
  REQUIRE_FALSE(noise.jumps().empty());
  const auto path = solve_mild(pr.op, pr.coefficients, pr.u0, noise);
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path.is_jump(i)) {
      const double z = noise.jumps()[static_cast<std::size_t>(noise.jump_at(i))].mark;
      CHECK(path.value(i)[0] - path.left_limit(i)[0] == doctest::Approx(z).epsilon(1e-12));
    } else {
      CHECK(path.left_limit(i) == Eigen::VectorXd(path.value(i)));
    }
  }
}

TEST_CASE("strong self-convergence under dt halving") {
  const auto pr = fixtures::nemytskii(8, 0.5, 4);
  const double fine_dt = pr.dt / 4.0;
  double e_coarse = 0.0;
  double e_fine = 0.0;
  for (std::uint64_t m = 0; m < 100; ++m) {
    const auto fine = sample_noise(pr.marks, pr.wiener_dim, pr.horizon, fine_dt, pr.seed, m);
    auto end = [&](std::size_t factor) {
      const auto noise = factor == 1 ? fine : coarsen(fine, factor);
      const auto path = solve_mild(pr.op, pr.coefficients, pr.u0, noise);
      return StateVector(path.value(path.size() - 1));
    };
    const StateVector u4 = end(4);
    const StateVector u2 = end(2);
    const StateVector u1 = end(1);
    e_coarse += (u4 - u2).norm();
    e_fine += (u2 - u1).norm();
  }
  const double ratio = e_coarse / e_fine;
  CAPTURE(ratio);
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.4);
}

TEST_CASE("blowup is flagged, not thrown") {
  CoefficientSet set{make_affine(StateVector::Zero(1), Eigen::MatrixXd::Constant(1, 1, 1000.0)),
                     make_zero(1, 0), make_zero(1, 1), std::nullopt};
  const SpectralOperator op({0.0});
  const auto noise = sample_noise(MarkSpace::none(), 0, 1.0, 0.1, 1, 0);
  const auto path = solve_mild(op, set, StateVector::Ones(1), noise);
  REQUIRE(path.blown_up());
  const std::size_t i = *path.blowup_index();
  CHECK(std::abs(path.value(i - 1)[0]) <= kBlowupThreshold);
  CHECK(std::isnan(path.value(path.size() - 1)[0]));
}

TEST_CASE("order guards") {
  const auto pr = fixtures::nemytskii(2, 0.5, 2);
  const StateVector h = StateVector::Ones(2);
  CHECK_THROWS_AS(solve_system(pr.op, pr.coefficients, pr.u0, {h, h, h}, pr.noise(0)),
                  DerivativeOrderError);
  const auto deep = fixtures::nemytskii(2, 0.5, 8);
  CHECK_THROWS_AS(solve_system(deep.op, deep.coefficients, deep.u0,
                               std::vector<StateVector>(6, h), deep.noise(0)),
                  std::invalid_argument);
}

TEST_CASE("the mild solution is a fixed point of the discrete mild map") {
  const auto pr = fixtures::nemytskii(4, 0.7, 4);
  const auto path = solve_mild(pr.op, pr.coefficients, pr.u0, pr.noise(5));
  const auto image = mild_map(pr.op, pr.coefficients, pr.u0, path);
  CHECK(max_rel(image, path) <= 1e-12);
}
