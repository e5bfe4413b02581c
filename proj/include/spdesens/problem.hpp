#pragma once

#include "spdesens/coefficients.hpp"
#include "spdesens/noise.hpp"
#include "spdesens/spectral.hpp"

#include <cstdint>

namespace spdesens {

/// Everything needed to simulate one ensemble: generator, coefficients,
/// noise law, time discretization, initial datum and master seed.
struct Problem {
  SpectralOperator op{std::vector<double>{1.0}};
  CoefficientSet coefficients;
  MarkSpace marks = MarkSpace::none();
  std::size_t wiener_dim = 0;
  double horizon = 1.0;
  double dt = 0.01;
  StateVector u0;
  std::uint64_t seed = 0;

  std::size_t dim() const { return op.dim(); }
  /// Noise of path `path_index`; a pure function of (seed, path_index).
  NoiseRealization noise(std::uint64_t path_index) const;
  /// Throws std::invalid_argument on inconsistent dimensions or 0 < dt <= T.
  void validate() const;
};

/// Reference problems used by the tests, the acceptance suite and the
/// example configs.
namespace fixtures {

/// f = B = G = 0 on a quadratic spectrum.
Problem free_flow(std::size_t d, double c, double horizon, double dt);

/// d = 1, A = 1, f = 0, B = sigma, G(z, x) = c z with marks +-1 of equal weight.
Problem ou_with_jumps(double sigma, double jump, double intensity, double horizon, double dt,
                      double u0);

/// Affine f, affine B and G linear in x: the solution map is affine in u0.
Problem linear(std::size_t d);

/// f(x) = gamma(L x) with |L| = l_norm, additive B, G(z, x) = z s gamma(L x).
Problem nemytskii(std::size_t d, double l_norm, int n_max, std::uint64_t l_seed = 7);

/// f = B = 0 and G(z, x) = z with marks {0.5, 2}: the state is the
/// compensated jump convolution.
Problem compensated_jumps(double intensity, double horizon, double dt);

/// Random d x d matrix rescaled to spectral norm `norm`.
Eigen::MatrixXd random_matrix(std::size_t d, double norm, std::uint64_t seed);

}  // namespace fixtures
}  // namespace spdesens
