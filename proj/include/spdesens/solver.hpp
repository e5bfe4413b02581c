#pragma once

#include "spdesens/coefficients.hpp"
#include "spdesens/faadibruno.hpp"
#include "spdesens/noise.hpp"
#include "spdesens/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spdesens {

/// Components beyond this magnitude flag the path as blown up.
inline constexpr double kBlowupThreshold = 1e12;

/// One trajectory on the noise grid. values.col(i) is the cadlag value at
/// t_i (post-jump); left limits are stored only at jump indices.
class PathSample {
 public:
  PathSample(NoiseRealization noise, Eigen::Index dim);

  const NoiseRealization& noise() const { return noise_; }
  const std::vector<double>& times() const { return noise_.grid(); }
  std::size_t size() const { return noise_.grid().size(); }
  Eigen::Index dim() const { return values_.rows(); }

  auto value(std::size_t i) const { return values_.col(static_cast<Eigen::Index>(i)); }
  /// Left limit u(t_i-); equal to value(i) away from jump times.
  Eigen::VectorXd left_limit(std::size_t i) const;
  bool is_jump(std::size_t i) const { return noise_.jump_at(i) >= 0; }

  const Eigen::MatrixXd& values() const { return values_; }
  const Eigen::MatrixXd& left_limits() const { return left_; }

  /// First grid index with a non-finite or > 1e12 component, if any.
  std::optional<std::size_t> blowup_index() const { return blowup_; }
  bool blown_up() const { return blowup_.has_value(); }

  // Writers used by the steppers.
  void set_value(std::size_t i, const Eigen::VectorXd& v) { values_.col(static_cast<Eigen::Index>(i)) = v; }
  void set_left_limit(std::size_t i, const Eigen::VectorXd& v);
  /// Marks index i as the blowup point and fills the remainder with NaN.
  void flag_blowup(std::size_t i);

 private:
  NoiseRealization noise_;
  Eigen::MatrixXd values_;
  Eigen::MatrixXd left_;  // one column per jump event
  std::optional<std::size_t> blowup_;
};

/// PathSample difference a - b (values and left limits); both must share the
/// same noise realization.
PathSample path_difference(const PathSample& a, const PathSample& b, double scale = 1.0);

/// Base path plus one sensitivity path per nonempty subset S of the direction
/// tuple, representing u^{(|S|)}(h_S).
struct SensitivitySystem {
  PathSample base;
  std::vector<StateVector> directions;
  std::vector<std::optional<PathSample>> paths;  // indexed by SubsetMask

  int order() const { return static_cast<int>(directions.size()); }
  SubsetMask full_mask() const { return (SubsetMask{1} << directions.size()) - 1; }
  const PathSample& path(SubsetMask mask) const;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exponential Euler stepper on the jump-adapted grid of one noise
/// realization. Between grid points
///   u(t_{i+1}-) = S(dt)[u + f(u) dt + B(u) dW - lambda int G(z,u) m(dz) dt],
/// and at a jump time with mark z, u(tau) = u(tau-) + G(z, u(tau-)).
class MildStepper {
 public:
  MildStepper(const SpectralOperator& op, const CoefficientSet& set, NoiseRealization noise);

  PathSample solve_mild(const StateVector& u0) const;

  /// Sensitivity path for subset `mask` of system.directions. The base path
  /// and every proper nonempty subset path must be present.
  PathSample solve_variational(const SensitivitySystem& system, SubsetMask mask) const;

  /// Base path and all subset paths in order of increasing |S|.
  SensitivitySystem solve_system(const StateVector& u0,
                                 const std::vector<StateVector>& directions) const;

  const NoiseRealization& noise() const { return noise_; }

 private:
  FieldValue compensator(const CoefficientField& field, double t, const StateVector& x) const;
  FieldValue linearized_compensator(const SensitivitySystem& system, SubsetMask mask,
                                    std::size_t i, const std::vector<const StateVector*>& lower,
                                    const StateVector& y) const;

  const SpectralOperator& op_;
  const CoefficientSet& set_;
  NoiseRealization noise_;
  Eigen::MatrixXd decay_;  // d x N: exp(-lambda_k dt_i)
  double mean_mark_ = 0.0;
};

PathSample solve_mild(const SpectralOperator& op, const CoefficientSet& set,
                      const StateVector& u0, const NoiseRealization& noise);

PathSample solve_variational(const SpectralOperator& op, const CoefficientSet& set,
                             const SensitivitySystem& system, SubsetMask mask,
                             const NoiseRealization& noise);

/// Throws DerivativeOrderError for n > n_max of the set and
/// std::invalid_argument for n > 5.
SensitivitySystem solve_system(const SpectralOperator& op, const CoefficientSet& set,
                               const StateVector& u0, const std::vector<StateVector>& directions,
                               const NoiseRealization& noise);

inline constexpr int kMaxSystemOrder = 5;

/// Discrete mild map Gamma(v) on a frozen noise path: the variation of
/// constants sum with coefficients evaluated along the input path v
/// (values and left limits). Its fixed point is solve_mild(u0).
PathSample mild_map(const SpectralOperator& op, const CoefficientSet& set,
                    const StateVector& u0, const PathSample& input);

}  // namespace spdesens
