#include "spdesens/coefficients.hpp"

#include <algorithm>
#include <cmath>

namespace spdesens {

const char* component_name(Component c) {
  switch (c) {
    case Component::Drift: return "f";
    case Component::Diffusion: return "B";
    case Component::Jump: return "G";
  }
  return "?";
}

DerivativeOrderError::DerivativeOrderError(int order, int max_order)
    : std::out_of_range("derivative order not available: requested " + std::to_string(order) +
                        ", n_max = " + std::to_string(max_order)),
      order_(order),
      max_order_(max_order) {}

FieldValue CoefficientField::derivative(int order, double t, double z, const StateVector& x,
                                        std::span<const StateVector> dirs) const {
  if (order < 0 || order > max_order()) throw DerivativeOrderError(order, max_order());
  if (dirs.size() != static_cast<std::size_t>(order)) {
    throw std::invalid_argument("derivative of order " + std::to_string(order) + " needs " +
                                std::to_string(order) + " directions");
  }
  if (x.size() != rows()) throw std::invalid_argument("state dimension mismatch");
  for (const auto& v : dirs) {
    if (v.size() != rows()) throw std::invalid_argument("direction dimension mismatch");
  }
  return derivative_impl(order, t, z, x, dirs);
}

double operator_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

namespace {

constexpr int kAffineMaxOrder = 8;

class ZeroField final : public CoefficientField {
 public:
  ZeroField(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols) {}
  Eigen::Index rows() const override { return rows_; }
  Eigen::Index cols() const override { return cols_; }
  int max_order() const override { return kAffineMaxOrder; }
  double lipschitz() const override { return 0.0; }
  double growth_degree() const override { return 0.0; }
  MarkDependence mark_dependence() const override { return MarkDependence::Independent; }

 protected:
  FieldValue derivative_impl(int, double, double, const StateVector&,
                             std::span<const StateVector>) const override {
    return FieldValue::Zero(rows_, cols_);
  }

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
};

class AffineField final : public CoefficientField {
 public:
  AffineField(StateVector offset, Eigen::MatrixXd linear, bool mark_scaled)
      : offset_(std::move(offset)), linear_(std::move(linear)), mark_scaled_(mark_scaled),
        lipschitz_(operator_norm(linear_)) {}
  Eigen::Index rows() const override { return offset_.size(); }
  Eigen::Index cols() const override { return 1; }
  int max_order() const override { return kAffineMaxOrder; }
  double lipschitz() const override { return lipschitz_; }
  double growth_degree() const override { return 0.0; }
  MarkDependence mark_dependence() const override {
    return mark_scaled_ ? MarkDependence::Linear : MarkDependence::Independent;
  }

 protected:
  FieldValue derivative_impl(int order, double, double z, const StateVector& x,
                             std::span<const StateVector> dirs) const override {
    const double s = mark_scaled_ ? z : 1.0;
    if (order == 0) return s * (offset_ + linear_ * x);
    if (order == 1) return s * (linear_ * dirs[0]);
    return FieldValue::Zero(rows(), 1);
  }

 private:
  StateVector offset_;
  Eigen::MatrixXd linear_;
  bool mark_scaled_;
  double lipschitz_;
};

class AffineDiffusion final : public CoefficientField {
 public:
  AffineDiffusion(Eigen::MatrixXd offset, std::vector<Eigen::MatrixXd> linear)
      : offset_(std::move(offset)), linear_(std::move(linear)) {
    // Hilbert-Schmidt Lipschitz bound: |sum_l B1[l] v e_l^T|_HS <= sqrt(sum_l |B1[l]|^2) |v|.
    double acc = 0.0;
    for (const auto& m : linear_) {
      const double n = operator_norm(m);
      acc += n * n;
    }
    lipschitz_ = std::sqrt(acc);
  }
  Eigen::Index rows() const override { return offset_.rows(); }
  Eigen::Index cols() const override { return offset_.cols(); }
  int max_order() const override { return kAffineMaxOrder; }
  double lipschitz() const override { return lipschitz_; }
  double growth_degree() const override { return 0.0; }
  MarkDependence mark_dependence() const override { return MarkDependence::Independent; }

 protected:
  FieldValue derivative_impl(int order, double, double, const StateVector& x,
                             std::span<const StateVector> dirs) const override {
    if (order == 0) {
      FieldValue out = offset_;
      for (std::size_t l = 0; l < linear_.size(); ++l) {
        out.col(static_cast<Eigen::Index>(l)) += linear_[l] * x;
      }
      return out;
    }
    FieldValue out = FieldValue::Zero(rows(), cols());
    if (order == 1) {
      for (std::size_t l = 0; l < linear_.size(); ++l) {
        out.col(static_cast<Eigen::Index>(l)) = linear_[l] * dirs[0];
      }
    }
    return out;
  }

 private:
  Eigen::MatrixXd offset_;
  std::vector<Eigen::MatrixXd> linear_;
  double lipschitz_ = 0.0;
};

class NemytskiiField final : public CoefficientField {
 public:
  NemytskiiField(Eigen::MatrixXd L, int n_max, double scale, Eigen::MatrixXd sigma,
                 bool mark_scaled)
      : L_(std::move(L)), sigma_(std::move(sigma)), scale_(scale), n_max_(n_max),
        mark_scaled_(mark_scaled) {
    // |gamma'| <= 1, so |F(x) - F(y)| <= |scale| max_k |Sigma_k.| |L| |x - y|.
    lipschitz_ = std::abs(scale_) * sigma_.rowwise().norm().maxCoeff() * operator_norm(L_);
  }
  Eigen::Index rows() const override { return L_.rows(); }
  Eigen::Index cols() const override { return sigma_.cols(); }
  int max_order() const override { return n_max_; }
  double lipschitz() const override { return lipschitz_; }
  double growth_degree() const override { return std::max(0, n_max_ - 1); }
  MarkDependence mark_dependence() const override {
    return mark_scaled_ ? MarkDependence::Linear : MarkDependence::Independent;
  }

 protected:
  FieldValue derivative_impl(int order, double, double z, const StateVector& x,
                             std::span<const StateVector> dirs) const override {
    const GammaFunction& gamma = GammaFunction::standard();
    const Eigen::VectorXd lx = L_ * x;
    Eigen::VectorXd weight(lx.size());
    for (Eigen::Index k = 0; k < lx.size(); ++k) weight[k] = gamma(lx[k], order);
    for (const auto& v : dirs) weight.array() *= (L_ * v).array();
    weight *= (mark_scaled_ ? z : 1.0) * scale_;
    return weight.asDiagonal() * sigma_;
  }

 private:
  Eigen::MatrixXd L_;
  Eigen::MatrixXd sigma_;
  double scale_;
  int n_max_;
  bool mark_scaled_;
  double lipschitz_ = 0.0;
};

class ScaledField final : public CoefficientField {
 public:
  ScaledField(FieldPtr inner, double alpha) : inner_(std::move(inner)), alpha_(alpha) {}
  Eigen::Index rows() const override { return inner_->rows(); }
  Eigen::Index cols() const override { return inner_->cols(); }
  int max_order() const override { return inner_->max_order(); }
  double lipschitz() const override { return std::abs(alpha_) * inner_->lipschitz(); }
  double growth_degree() const override { return inner_->growth_degree(); }
  MarkDependence mark_dependence() const override { return inner_->mark_dependence(); }

 protected:
  FieldValue derivative_impl(int order, double t, double z, const StateVector& x,
                             std::span<const StateVector> dirs) const override {
    return alpha_ * inner_->derivative(order, t, z, x, dirs);
  }

 private:
  FieldPtr inner_;
  double alpha_;
};

}  // namespace

FieldPtr make_zero(Eigen::Index rows, Eigen::Index cols) {
  return std::make_shared<ZeroField>(rows, cols);
}

FieldPtr make_affine(StateVector offset, Eigen::MatrixXd linear, bool mark_scaled) {
  if (linear.rows() != offset.size() || linear.cols() != offset.size()) {
    throw std::invalid_argument("affine coefficient: F1 must be d x d with d = dim(F0)");
  }
  return std::make_shared<AffineField>(std::move(offset), std::move(linear), mark_scaled);
}

FieldPtr make_affine_diffusion(Eigen::MatrixXd offset, std::vector<Eigen::MatrixXd> linear) {
  if (!linear.empty() && static_cast<Eigen::Index>(linear.size()) != offset.cols()) {
    throw std::invalid_argument("affine diffusion: need one linear block per Wiener component");
  }
  for (const auto& m : linear) {
    if (m.rows() != offset.rows() || m.cols() != offset.rows()) {
      throw std::invalid_argument("affine diffusion: linear blocks must be d x d");
    }
  }
  return std::make_shared<AffineDiffusion>(std::move(offset), std::move(linear));
}

FieldPtr make_nemytskii(Eigen::MatrixXd L, int n_max, double scale,
                        std::optional<Eigen::MatrixXd> sigma, bool mark_scaled) {
  if (L.rows() == 0 || L.rows() != L.cols()) {
    throw std::invalid_argument("Nemytskii coefficient: L must be a nonempty d x d matrix");
  }
  if (!L.allFinite()) throw std::invalid_argument("Nemytskii coefficient: L must be finite");
  if (n_max < 1 || n_max > GammaFunction::kMaxOrder) {
    throw std::invalid_argument("Nemytskii coefficient: n_max must lie in [1, " +
                                std::to_string(GammaFunction::kMaxOrder) + "]");
  }
  Eigen::MatrixXd s = sigma.value_or(Eigen::MatrixXd::Ones(L.rows(), 1));
  if (s.rows() != L.rows()) {
    throw std::invalid_argument("Nemytskii coefficient: Sigma must have d rows");
  }
  return std::make_shared<NemytskiiField>(std::move(L), n_max, scale, std::move(s), mark_scaled);
}

FieldPtr make_scaled(FieldPtr field, double alpha) {
  return std::make_shared<ScaledField>(std::move(field), alpha);
}

const CoefficientField& CoefficientSet::component(Component c) const {
  switch (c) {
    case Component::Drift: return *drift;
    case Component::Diffusion: return *diffusion;
    case Component::Jump: return *jump;
  }
  throw std::invalid_argument("unknown component");
}

double CoefficientSet::jump_bound(double, double z) const {
  return jump->lipschitz() * (jump->mark_scaled() ? std::abs(z) : 1.0);
}

std::pair<double, double> CoefficientSet::jump_split_bound(double t, double z) const {
  if (jump_split) {
    const auto& [g1, g2] = *jump_split;
    const double a = g1->lipschitz() * (g1->mark_scaled() ? std::abs(z) : 1.0);
    const double b = g2->lipschitz() * (g2->mark_scaled() ? std::abs(z) : 1.0);
    return {a, b};
  }
  const double g = jump_bound(t, z);
  return {0.5 * g, 0.5 * g};
}

double CoefficientSet::growth_degree() const {
  return std::max({drift->growth_degree(), diffusion->growth_degree(), jump->growth_degree()});
}

int CoefficientSet::max_order() const {
  return std::min({drift->max_order(), diffusion->max_order(), jump->max_order()});
}

void CoefficientSet::validate() const {
  if (!drift || !diffusion || !jump) {
    throw std::invalid_argument("coefficient set needs f, B and G");
  }
  const Eigen::Index d = drift->rows();
  if (drift->cols() != 1 || jump->cols() != 1) {
    throw std::invalid_argument("f and G must be vector valued");
  }
  if (diffusion->rows() != d || jump->rows() != d) {
    throw std::invalid_argument("f, B and G must share the state dimension");
  }
  if (jump_split) {
    const auto& [g1, g2] = *jump_split;
    if (!g1 || !g2 || g1->rows() != d || g2->rows() != d) {
      throw std::invalid_argument("jump split must consist of two d-dimensional fields");
    }
  }
}

FieldValue eval_derivative(const CoefficientSet& set, Component which, int order, double t,
                           std::optional<double> z, const StateVector& x,
                           std::span<const StateVector> dirs) {
  if (which == Component::Jump && !z) {
    throw std::invalid_argument("a mark z is required to evaluate G");
  }
  if (which != Component::Jump && z) {
    throw std::invalid_argument(std::string("a mark is only meaningful for G, not ") +
                                component_name(which));
  }
  if (order > set.max_order()) throw DerivativeOrderError(order, set.max_order());
  return set.component(which).derivative(order, t, z.value_or(0.0), x, dirs);
}

}  // namespace spdesens
