#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace spdesens {

/// Element of the truncated state space, stored as coordinates in the
/// eigenbasis of the generator.
using StateVector = Eigen::VectorXd;

/// Diagonal nonnegative generator A with eigenvalues lambda_k; the semigroup
/// S(t) = exp(-tA) acts componentwise and is a contraction.
class SpectralOperator {
 public:
  /// Throws std::invalid_argument if empty or any eigenvalue is negative or
  /// not finite.
  explicit SpectralOperator(std::vector<double> eigenvalues);

  /// lambda_k = c k^2 for k = 1..d.
  static SpectralOperator quadratic(std::size_t d, double c);

  std::size_t dim() const { return eigenvalues_.size(); }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }

  /// exp(-lambda_k tau) for every k.
  Eigen::VectorXd decay_factors(double tau) const;

 private:
  std::vector<double> eigenvalues_;
};

/// S(tau) x. Rejects tau < 0 and dimension mismatch.
StateVector semigroup_apply(const SpectralOperator& op, double tau, const StateVector& x);

inline double hilbert_norm(const StateVector& x) { return x.norm(); }

}  // namespace spdesens
