#include "spdesens/solver.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace spdesens {

PathSample::PathSample(NoiseRealization noise, Eigen::Index dim)
    : noise_(std::move(noise)),
      values_(Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(noise_.grid().size()))),
      left_(Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(noise_.jumps().size()))) {}

Eigen::VectorXd PathSample::left_limit(std::size_t i) const {
  const int j = noise_.jump_at(i);
  if (j < 0) return values_.col(static_cast<Eigen::Index>(i));
  return left_.col(j);
}

void PathSample::set_left_limit(std::size_t i, const Eigen::VectorXd& v) {
  const int j = noise_.jump_at(i);
  if (j >= 0) left_.col(j) = v;
}

void PathSample::flag_blowup(std::size_t i) {
  if (blowup_ && *blowup_ <= i) return;
  blowup_ = i;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = i; k < size(); ++k) {
    values_.col(static_cast<Eigen::Index>(k)).setConstant(nan);
    const int j = noise_.jump_at(k);
    if (j >= 0 && k > i) left_.col(j).setConstant(nan);
  }
}

PathSample path_difference(const PathSample& a, const PathSample& b, double scale) {
  if (!a.noise().same_realization(b.noise()) || a.dim() != b.dim()) {
    throw std::invalid_argument("path difference needs paths driven by the same noise");
  }
  PathSample out(a.noise(), a.dim());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.set_value(i, (a.value(i) - b.value(i)) * scale);
    if (a.is_jump(i)) out.set_left_limit(i, (a.left_limit(i) - b.left_limit(i)) * scale);
  }
  std::optional<std::size_t> blow = a.blowup_index();
  if (b.blowup_index() && (!blow || *b.blowup_index() < *blow)) blow = b.blowup_index();
  if (blow) out.flag_blowup(*blow);
  return out;
}

const PathSample& SensitivitySystem::path(SubsetMask mask) const {
  if (mask >= paths.size() || !paths[mask]) {
    throw SolverError("sensitivity path " + mask_to_string(mask) + " has not been computed");
  }
  return *paths[mask];
}

namespace {

bool exceeds(const Eigen::VectorXd& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (!std::isfinite(v[k]) || std::abs(v[k]) > kBlowupThreshold) return true;
  }
  return false;
}

}  // namespace

MildStepper::MildStepper(const SpectralOperator& op, const CoefficientSet& set,
                         NoiseRealization noise)
    : op_(op), set_(set), noise_(std::move(noise)) {
  set_.validate();
  if (set_.dim() != op_.dim()) {
    throw std::invalid_argument("coefficient dimension " + std::to_string(set_.dim()) +
                                " does not match spectral dimension " + std::to_string(op_.dim()));
  }
  if (set_.wiener_dim() != noise_.wiener_dim()) {
    throw std::invalid_argument("diffusion has " + std::to_string(set_.wiener_dim()) +
                                " Wiener columns but the noise has " +
                                std::to_string(noise_.wiener_dim()));
  }
  const auto& grid = noise_.grid();
  decay_.resize(static_cast<Eigen::Index>(op_.dim()), static_cast<Eigen::Index>(grid.size() - 1));
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    decay_.col(static_cast<Eigen::Index>(i)) = op_.decay_factors(grid[i + 1] - grid[i]);
  }
  for (const auto& node : noise_.marks().nodes()) mean_mark_ += node.weight * node.mark;
}

FieldValue MildStepper::compensator(const CoefficientField& field, double t,
                                    const StateVector& x) const {
  const double lambda = noise_.marks().intensity();
  if (lambda == 0.0) return FieldValue::Zero(field.rows(), field.cols());
  switch (field.mark_dependence()) {
    case MarkDependence::Independent: return lambda * field.value(t, 1.0, x);
    case MarkDependence::Linear: return (lambda * mean_mark_) * field.value(t, 1.0, x);
    case MarkDependence::General: break;
  }
  FieldValue acc = FieldValue::Zero(field.rows(), field.cols());
  for (const auto& node : noise_.marks().nodes()) acc += node.weight * field.value(t, node.mark, x);
  return lambda * acc;
}

PathSample MildStepper::solve_mild(const StateVector& u0) const {
  if (static_cast<std::size_t>(u0.size()) != op_.dim()) {
    throw std::invalid_argument("initial datum has the wrong dimension");
  }
  const auto& grid = noise_.grid();
  PathSample path(noise_, u0.size());
  path.set_value(0, u0);
  if (exceeds(u0)) {
    path.flag_blowup(0);
    return path;
  }
  Eigen::VectorXd x = u0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double t = grid[i];
    const double dt = grid[i + 1] - t;
    Eigen::VectorXd bracket = x + set_.drift->value(t, 0.0, x) * dt +
                              set_.diffusion->value(t, 0.0, x) * noise_.increment(i) -
                              compensator(*set_.jump, t, x) * dt;
    x = decay_.col(static_cast<Eigen::Index>(i)).cwiseProduct(bracket);
    const int j = noise_.jump_at(i + 1);
    if (j >= 0) {
      path.set_left_limit(i + 1, x);
      const auto& ev = noise_.jumps()[static_cast<std::size_t>(j)];
      x += set_.jump->value(ev.time, ev.mark, x);
    }
    if (exceeds(x)) {
      path.flag_blowup(i + 1);
      return path;
    }
    path.set_value(i + 1, x);
  }
  return path;
}

PathSample MildStepper::solve_variational(const SensitivitySystem& system, SubsetMask mask) const {
  const int n = system.order();
  if (mask == 0 || mask > system.full_mask()) {
    throw SolverError("invalid subset " + mask_to_string(mask) + " for order " + std::to_string(n));
  }
  const int k = std::popcount(mask);
  if (k > set_.max_order()) throw DerivativeOrderError(k, set_.max_order());
  const PathSample& base = system.base;
  if (!base.noise().same_realization(noise_)) {
    throw SolverError("base path was computed on a different noise realization");
  }
  std::vector<const PathSample*> lower(std::size_t{1} << n, nullptr);
  for (SubsetMask sub = (mask - 1) & mask; sub > 0; sub = (sub - 1) & mask) {
    const PathSample& p = system.path(sub);
    if (!p.noise().same_realization(noise_)) {
      throw SolverError("sensitivity path " + mask_to_string(sub) + " uses different noise");
    }
    lower[sub] = &p;
  }

  const auto& grid = noise_.grid();
  const Eigen::Index d = static_cast<Eigen::Index>(op_.dim());
  PathSample path(noise_, d);

  StateVector y = StateVector::Zero(d);
  if (k == 1) y = system.directions[static_cast<std::size_t>(std::countr_zero(mask))];
  path.set_value(0, y);

  std::vector<StateVector> slot(lower.size(), StateVector::Zero(d));
  auto lookup = [&](SubsetMask m) -> const StateVector* {
    return m < lower.size() && lower[m] ? &slot[m] : nullptr;
  };
  auto load_lower = [&](std::size_t i, bool left) {
    for (SubsetMask sub = (mask - 1) & mask; sub > 0; sub = (sub - 1) & mask) {
      slot[sub] = left ? lower[sub]->left_limit(i) : StateVector(lower[sub]->value(i));
    }
  };
  auto correction = [&](const CoefficientField& field, double t, double z, const StateVector& u) {
    auto deriv = [&](int order, std::span<const StateVector> dirs) {
      return field.derivative(order, t, z, u, dirs);
    };
    return assemble_correction(deriv, mask, lookup, field.rows(), field.cols());
  };
  // DG(z,u)y + Theta(z): the jump coefficient linearized along the system.
  auto jump_linearization = [&](double t, double z, const StateVector& u, const StateVector& v) {
    const StateVector one[1] = {v};
    FieldValue out = set_.jump->derivative(1, t, z, u, one);
    if (k > 1) out += correction(*set_.jump, t, z, u);
    return out;
  };
  const double lambda = noise_.marks().intensity();

  std::optional<std::size_t> stop = base.blowup_index();
  for (SubsetMask sub = (mask - 1) & mask; sub > 0; sub = (sub - 1) & mask) {
    const auto b = lower[sub]->blowup_index();
    if (b && (!stop || *b < *stop)) stop = b;
  }

  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (stop && *stop <= i + 1) {
      path.flag_blowup(*stop);
      return path;
    }
    const double t = grid[i];
    const double dt = grid[i + 1] - t;
    const StateVector u = base.value(i);
    if (k > 1) load_lower(i, false);
    const StateVector one[1] = {y};

    FieldValue drift = set_.drift->derivative(1, t, 0.0, u, one);
    FieldValue diff = set_.diffusion->derivative(1, t, 0.0, u, one);
    if (k > 1) {
      drift += correction(*set_.drift, t, 0.0, u);
      diff += correction(*set_.diffusion, t, 0.0, u);
    }
    Eigen::VectorXd bracket = y + drift * dt + diff * noise_.increment(i);
    if (lambda != 0.0) {
      FieldValue comp;
      switch (set_.jump->mark_dependence()) {
        case MarkDependence::Independent: comp = jump_linearization(t, 1.0, u, y); break;
        case MarkDependence::Linear: comp = mean_mark_ * jump_linearization(t, 1.0, u, y); break;
        case MarkDependence::General:
          comp = FieldValue::Zero(d, 1);
          for (const auto& node : noise_.marks().nodes()) {
            comp += node.weight * jump_linearization(t, node.mark, u, y);
          }
          break;
      }
      bracket -= (lambda * dt) * comp;
    }
    y = decay_.col(static_cast<Eigen::Index>(i)).cwiseProduct(bracket);

    const int j = noise_.jump_at(i + 1);
    if (j >= 0) {
      path.set_left_limit(i + 1, y);
      const auto& ev = noise_.jumps()[static_cast<std::size_t>(j)];
      const StateVector u_left = base.left_limit(i + 1);
      if (k > 1) load_lower(i + 1, true);
      y += jump_linearization(ev.time, ev.mark, u_left, y);
    }
    if (exceeds(y)) {
      path.flag_blowup(i + 1);
      return path;
    }
    path.set_value(i + 1, y);
  }
  return path;
}

SensitivitySystem MildStepper::solve_system(const StateVector& u0,
                                            const std::vector<StateVector>& directions) const {
  const int n = static_cast<int>(directions.size());
  if (n > kMaxSystemOrder) {
    throw std::invalid_argument("sensitivity order " + std::to_string(n) +
                                " exceeds the desk-scale limit " + std::to_string(kMaxSystemOrder));
  }
  if (n > set_.max_order()) throw DerivativeOrderError(n, set_.max_order());
  for (const auto& h : directions) {
    if (static_cast<std::size_t>(h.size()) != op_.dim()) {
      throw std::invalid_argument("direction has the wrong dimension");
    }
  }
  SensitivitySystem system{solve_mild(u0), directions, {}};
  system.paths.resize(std::size_t{1} << n);
  for (int k = 1; k <= n; ++k) {
    for (SubsetMask mask = 1; mask <= system.full_mask(); ++mask) {
      if (std::popcount(mask) != k) continue;
      try {
        system.paths[mask] = solve_variational(system, mask);
      } catch (const SolverError& e) {
        throw SolverError("subset " + mask_to_string(mask) + ": " + e.what());
      }
    }
  }
  return system;
}

PathSample solve_mild(const SpectralOperator& op, const CoefficientSet& set,
                      const StateVector& u0, const NoiseRealization& noise) {
  return MildStepper(op, set, noise).solve_mild(u0);
}

PathSample solve_variational(const SpectralOperator& op, const CoefficientSet& set,
                             const SensitivitySystem& system, SubsetMask mask,
                             const NoiseRealization& noise) {
  return MildStepper(op, set, noise).solve_variational(system, mask);
}

SensitivitySystem solve_system(const SpectralOperator& op, const CoefficientSet& set,
                               const StateVector& u0, const std::vector<StateVector>& directions,
                               const NoiseRealization& noise) {
  return MildStepper(op, set, noise).solve_system(u0, directions);
}

PathSample mild_map(const SpectralOperator& op, const CoefficientSet& set,
                    const StateVector& u0, const PathSample& input) {
  const NoiseRealization& noise = input.noise();
  const auto& grid = noise.grid();
  const double lambda = noise.marks().intensity();
  double mean_mark = 0.0;
  for (const auto& node : noise.marks().nodes()) mean_mark += node.weight * node.mark;

  auto comp = [&](double t, const StateVector& v) -> Eigen::VectorXd {
    if (lambda == 0.0) return Eigen::VectorXd::Zero(v.size());
    switch (set.jump->mark_dependence()) {
      case MarkDependence::Independent: return lambda * set.jump->value(t, 1.0, v);
      case MarkDependence::Linear: return lambda * mean_mark * set.jump->value(t, 1.0, v);
      case MarkDependence::General: break;
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(v.size());
    for (const auto& node : noise.marks().nodes()) acc += node.weight * set.jump->value(t, node.mark, v);
    return lambda * acc;
  };

  PathSample out(noise, u0.size());
  Eigen::VectorXd w = u0;
  out.set_value(0, w);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double t = grid[i];
    const double dt = grid[i + 1] - t;
    const StateVector v = input.value(i);
    Eigen::VectorXd bracket = w + set.drift->value(t, 0.0, v) * dt +
                              set.diffusion->value(t, 0.0, v) * noise.increment(i) - comp(t, v) * dt;
    w = op.decay_factors(dt).cwiseProduct(bracket);
    const int j = noise.jump_at(i + 1);
    if (j >= 0) {
      out.set_left_limit(i + 1, w);
      const auto& ev = noise.jumps()[static_cast<std::size_t>(j)];
      w += set.jump->value(ev.time, ev.mark, input.left_limit(i + 1));
    }
    out.set_value(i + 1, w);
  }
  return out;
}

}  // namespace spdesens
