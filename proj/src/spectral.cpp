#include "spdesens/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spdesens {

SpectralOperator::SpectralOperator(std::vector<double> eigenvalues)
    : eigenvalues_(std::move(eigenvalues)) {
  if (eigenvalues_.empty()) {
    throw std::invalid_argument("spectral operator needs at least one eigenvalue");
  }
  for (std::size_t k = 0; k < eigenvalues_.size(); ++k) {
    const double l = eigenvalues_[k];
    if (!std::isfinite(l) || l < 0.0) {
      throw std::invalid_argument("eigenvalue " + std::to_string(k) +
                                  " must be finite and nonnegative, got " + std::to_string(l));
    }
  }
}

SpectralOperator SpectralOperator::quadratic(std::size_t d, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("quadratic spectrum needs a finite c >= 0");
  }
  std::vector<double> ev(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double kk = static_cast<double>(k + 1);
    ev[k] = c * kk * kk;
  }
  return SpectralOperator(std::move(ev));
}

Eigen::VectorXd SpectralOperator::decay_factors(double tau) const {
  if (!(tau >= 0.0)) {
    throw std::invalid_argument("semigroup time must be nonnegative");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(dim()));
  for (std::size_t k = 0; k < dim(); ++k) {
    out[static_cast<Eigen::Index>(k)] = std::exp(-eigenvalues_[k] * tau);
  }
  return out;
}

StateVector semigroup_apply(const SpectralOperator& op, double tau, const StateVector& x) {
  if (static_cast<std::size_t>(x.size()) != op.dim()) {
    throw std::invalid_argument("state dimension does not match the spectral operator");
  }
  return op.decay_factors(tau).cwiseProduct(x);
}

}  // namespace spdesens
