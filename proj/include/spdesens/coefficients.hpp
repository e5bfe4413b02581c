#pragma once

#include "spdesens/gamma.hpp"
#include "spdesens/spectral.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spdesens {

/// Value of a coefficient or of one of its multilinear derivatives: a d x 1
/// column for f and G, a d x d_W matrix for B.
using FieldValue = Eigen::MatrixXd;

enum class Component { Drift, Diffusion, Jump };

enum class MarkDependence { Independent, Linear, General };

const char* component_name(Component c);

class DerivativeOrderError : public std::out_of_range {
 public:
  DerivativeOrderError(int order, int max_order);
  int order() const { return order_; }
  int max_order() const { return max_order_; }

 private:
  int order_;
  int max_order_;
};

/// A (possibly mark-dependent) coefficient x -> F(t, z, x) together with its
/// Frechet derivatives D^j F(t, z, x)[v_1, ..., v_j] up to max_order().
class CoefficientField {
 public:
  virtual ~CoefficientField() = default;

  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual int max_order() const = 0;

  /// order == 0 evaluates F itself (dirs must be empty).
  FieldValue derivative(int order, double t, double z, const StateVector& x,
                        std::span<const StateVector> dirs) const;

  FieldValue value(double t, double z, const StateVector& x) const {
    return derivative(0, t, z, x, {});
  }

  /// Global Lipschitz constant in x (for mark-dependent fields: at |z| = 1).
  virtual double lipschitz() const = 0;
  /// Bound on |D^j F(x)| / (1 + |x|^m) for the growth exponent m.
  virtual double growth_degree() const = 0;
  /// How F depends on the mark z. Independent and Linear (F(z,x) = z F(1,x))
  /// let integrals against the mark law collapse to a single evaluation.
  virtual MarkDependence mark_dependence() const { return MarkDependence::General; }
  bool mark_scaled() const { return mark_dependence() == MarkDependence::Linear; }

 protected:
  virtual FieldValue derivative_impl(int order, double t, double z, const StateVector& x,
                                     std::span<const StateVector> dirs) const = 0;
};

using FieldPtr = std::shared_ptr<const CoefficientField>;

FieldPtr make_zero(Eigen::Index rows, Eigen::Index cols);

/// F(z, x) = s(z) (F0 + F1 x) with s(z) = z when mark_scaled, else 1.
FieldPtr make_affine(StateVector offset, Eigen::MatrixXd linear, bool mark_scaled = false);

/// B(x) e_l = B0 e_l + B1[l] x, l = 1..d_W. An empty B1 gives a constant B.
FieldPtr make_affine_diffusion(Eigen::MatrixXd offset, std::vector<Eigen::MatrixXd> linear);

/// Nemytskii map F(z, x)_{k,l} = s(z) * scale * gamma((L x)_k) * Sigma_{k,l}.
/// With Sigma a single column of ones this is f(x) = scale * gamma(L x).
/// D^j F(x)[v_1..v_j]_{k,l} = s(z) scale gamma^{(j)}((Lx)_k) prod_i (L v_i)_k Sigma_{k,l}.
FieldPtr make_nemytskii(Eigen::MatrixXd L, int n_max, double scale = 1.0,
                        std::optional<Eigen::MatrixXd> sigma = std::nullopt,
                        bool mark_scaled = false);

/// alpha * F, used for explicit splits G = G1 + G2.
FieldPtr make_scaled(FieldPtr field, double alpha);

/// Largest singular value.
double operator_norm(const Eigen::MatrixXd& m);

/// The coefficient triple (f, B, G) with its growth metadata.
struct CoefficientSet {
  FieldPtr drift;      // f: d x 1
  FieldPtr diffusion;  // B: d x d_W
  FieldPtr jump;       // G: d x 1, mark dependent
  /// Optional explicit split G = G1 + G2; without it g1 = g2 = g / 2.
  std::optional<std::pair<FieldPtr, FieldPtr>> jump_split;

  std::size_t dim() const { return static_cast<std::size_t>(drift->rows()); }
  std::size_t wiener_dim() const { return static_cast<std::size_t>(diffusion->cols()); }
  const CoefficientField& component(Component c) const;

  /// C_f: Lipschitz constant of f.
  double drift_lipschitz() const { return drift->lipschitz(); }
  /// C_B: Lipschitz constant of B in Hilbert-Schmidt norm.
  double diffusion_lipschitz() const { return diffusion->lipschitz(); }
  /// g(t, z): Lipschitz constant of G(t, z, .).
  double jump_bound(double t, double z) const;
  /// (g1, g2)(t, z) from the explicit split, or (g/2, g/2).
  std::pair<double, double> jump_split_bound(double t, double z) const;
  /// Growth exponent m of the derivatives.
  double growth_degree() const;
  /// Highest derivative order available on every component.
  int max_order() const;

  /// Throws std::invalid_argument if dimensions are inconsistent.
  void validate() const;
};

/// D^order of the selected component. A mark is required for the jump
/// coefficient and rejected for the others.
FieldValue eval_derivative(const CoefficientSet& set, Component which, int order, double t,
                           std::optional<double> z, const StateVector& x,
                           std::span<const StateVector> dirs);

}  // namespace spdesens
