#include "spdesens/problem.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace spdesens {

NoiseRealization Problem::noise(std::uint64_t path_index) const {
  return sample_noise(marks, wiener_dim, horizon, dt, seed, path_index);
}

void Problem::validate() const {
  coefficients.validate();
  if (coefficients.dim() != op.dim()) {
    throw std::invalid_argument("coefficients have dimension " + std::to_string(coefficients.dim()) +
                                " but the spectrum has " + std::to_string(op.dim()));
  }
  if (coefficients.wiener_dim() != wiener_dim) {
    throw std::invalid_argument("B has " + std::to_string(coefficients.wiener_dim()) +
                                " columns but d_w = " + std::to_string(wiener_dim));
  }
  if (static_cast<std::size_t>(u0.size()) != op.dim()) {
    throw std::invalid_argument("u0 has dimension " + std::to_string(u0.size()) + ", expected " +
                                std::to_string(op.dim()));
  }
  if (!(dt > 0.0) || !(dt <= horizon)) throw std::invalid_argument("need 0 < dt <= T");
}

namespace fixtures {

Eigen::MatrixXd random_matrix(std::size_t d, double norm, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = normal(rng);
  }
  return m * (norm / operator_norm(m));
}

Problem free_flow(std::size_t d, double c, double horizon, double dt) {
  const auto n = static_cast<Eigen::Index>(d);
  CoefficientSet set{make_zero(n, 1), make_zero(n, 0), make_zero(n, 1), std::nullopt};
  StateVector u0(n);
  for (Eigen::Index k = 0; k < n; ++k) u0[k] = 1.0 / static_cast<double>(k + 1);
  return Problem{SpectralOperator::quadratic(d, c), std::move(set), MarkSpace::none(), 0,
                 horizon, dt, std::move(u0), 1};
}

Problem ou_with_jumps(double sigma, double jump, double intensity, double horizon, double dt,
                      double u0) {
  CoefficientSet set{
      make_zero(1, 1),
      make_affine_diffusion(Eigen::MatrixXd::Constant(1, 1, sigma), {}),
      make_affine(StateVector::Constant(1, jump), Eigen::MatrixXd::Zero(1, 1), true),
      std::nullopt};
  return Problem{SpectralOperator({1.0}), std::move(set),
                 MarkSpace::finite({1.0, -1.0}, {0.5, 0.5}, intensity), 1, horizon, dt,
                 StateVector::Constant(1, u0), 2};
}

Problem linear(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  const std::size_t dw = 2;
  Eigen::MatrixXd b0 = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(dw));
  for (Eigen::Index k = 0; k < n; ++k) b0(k, k % 2) = 0.2;
  CoefficientSet set{
      make_affine(StateVector::Constant(n, 0.1), random_matrix(d, 0.5, 11)),
      make_affine_diffusion(b0, {random_matrix(d, 0.1, 12), random_matrix(d, 0.1, 13)}),
      make_affine(StateVector::Constant(n, 0.1), random_matrix(d, 0.2, 14), true),
      std::nullopt};
  return Problem{SpectralOperator::quadratic(d, 0.5), std::move(set),
                 MarkSpace::finite({1.0, -0.5}, {0.5, 0.5}, 2.0), dw, 1.0, 0.01,
                 StateVector::Constant(n, 0.5), 3};
}

Problem nemytskii(std::size_t d, double l_norm, int n_max, std::uint64_t l_seed) {
  const auto n = static_cast<Eigen::Index>(d);
  const Eigen::MatrixXd L = random_matrix(d, l_norm, l_seed);
  CoefficientSet set{
      make_nemytskii(L, n_max),
      make_affine_diffusion(0.3 * Eigen::MatrixXd::Identity(n, n), {}),
      make_nemytskii(L, n_max, 0.5, std::nullopt, true),
      std::nullopt};
  return Problem{SpectralOperator::quadratic(d, 0.2), std::move(set),
                 MarkSpace::finite({1.0, -0.5}, {0.7, 0.3}, 1.0), d, 1.0, 0.01,
                 StateVector::Constant(n, 0.7), 4};
}

Problem compensated_jumps(double intensity, double horizon, double dt) {
  CoefficientSet set{make_zero(1, 1), make_zero(1, 0),
                     make_affine(StateVector::Constant(1, 1.0), Eigen::MatrixXd::Zero(1, 1), true),
                     std::nullopt};
  return Problem{SpectralOperator({0.5}), std::move(set),
                 MarkSpace::finite({0.5, 2.0}, {0.4, 0.6}, intensity), 0, horizon, dt,
                 StateVector::Zero(1), 5};
}

}  // namespace fixtures
}  // namespace spdesens
