#pragma once

#include <vector>

namespace spdesens {

/// gamma(r) = int_0^r sin(s^2) ds and its derivatives. gamma' = sin(r^2) is
/// bounded while every higher derivative grows like |r|^{j-1}.
class GammaFunction {
 public:
  static constexpr int kMaxOrder = 9;
  static constexpr double kMaxArgument = 1e6;

  /// Tabulates gamma on [0, table_range] with step table_step. Beyond the
  /// table an asymptotic expansion of the Fresnel tail is used.
  explicit GammaFunction(double table_range = 6.0, double table_step = 1.0 / 256.0);

  /// Shared default instance (built on first use).
  static const GammaFunction& standard();

  /// gamma^{(order)}(r). Throws std::out_of_range for |r| > 1e6 or order
  /// outside [0, kMaxOrder].
  double operator()(double r, int order = 0) const;

  double table_range() const { return range_; }

 private:
  double value(double r) const;

  double range_;
  double step_;
  std::vector<double> table_;  // gamma at k*step_
};

/// Convenience wrapper over GammaFunction::standard().
double gamma_eval(double r, int order);

}  // namespace spdesens
