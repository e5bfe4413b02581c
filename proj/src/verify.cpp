#include "spdesens/verify.hpp"

#include "spdesens/parallel.hpp"
#include "spdesens/solver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace spdesens {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_epsilons(const std::vector<double>& eps) {
  if (eps.empty()) throw std::invalid_argument("need at least one epsilon");
  for (double e : eps) {
    if (e == 0.0 || !std::isfinite(e)) throw std::invalid_argument("epsilon must be finite and nonzero");
  }
}

/// sup_i |(a_i - b_i) / eps - d_i| over grid values and left limits.
double remainder_sup(const PathSample& a, const PathSample& b, const PathSample& d, double eps) {
  if (a.blown_up() || b.blown_up() || d.blown_up()) return kInf;
  double sup = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Eigen::VectorXd r = (a.value(i) - b.value(i)) / eps - d.value(i);
    sup = std::max(sup, r.norm());
    if (a.is_jump(i)) {
      const Eigen::VectorXd rl = (a.left_limit(i) - b.left_limit(i)) / eps - d.left_limit(i);
      sup = std::max(sup, rl.norm());
    }
  }
  return sup;
}

std::string describe(const StateVector& h) {
  std::ostringstream os;
  os.precision(6);
  os << "|h|=" << h.norm();
  return os.str();
}

/// Per path and epsilon, the sup-norm of the order-n difference-quotient
/// remainder; n = directions.size() >= 1.
std::vector<std::vector<double>> quotient_remainders(const Problem& problem,
                                                     const std::vector<StateVector>& directions,
                                                     const std::vector<double>& epsilons,
                                                     const VerifyOptions& opts) {
  const int n = static_cast<int>(directions.size());
  const SubsetMask top_mask = (SubsetMask{1} << n) - 1;
  const SubsetMask prev_mask = (SubsetMask{1} << (n - 1)) - 1;
  const std::vector<StateVector> lower(directions.begin(), directions.end() - 1);

  std::vector<std::vector<double>> sups(epsilons.size(), std::vector<double>(opts.paths, 0.0));
  parallel_for(opts.paths, opts.threads, [&](std::size_t m) {
    const MildStepper stepper(problem.op, problem.coefficients, problem.noise(m));
    const SensitivitySystem system = stepper.solve_system(problem.u0, directions);
    const PathSample& top = system.path(top_mask);
    const PathSample& prev = n == 1 ? system.base : system.path(prev_mask);
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      const StateVector shifted = problem.u0 + epsilons[e] * directions.back();
      if (n == 1) {
        const PathSample moved = stepper.solve_mild(shifted);
        sups[e][m] = remainder_sup(moved, prev, top, epsilons[e]);
      } else {
        const SensitivitySystem moved = stepper.solve_system(shifted, lower);
        sups[e][m] = remainder_sup(moved.path(prev_mask), prev, top, epsilons[e]);
      }
    }
  });
  return sups;
}

RemainderTable tabulate(std::string test, const std::vector<double>& epsilons,
                        const std::vector<std::vector<double>>& sups, const VerifyOptions& opts) {
  RemainderTable table;
  table.test = std::move(test);
  table.p = opts.p;
  std::vector<double> values;
  std::vector<double> ratios;
  double worst_blowup = 0.0;
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    RemainderRow row{epsilons[e], sp_norm_from_sups(sups[e], opts.p, true), std::nullopt};
    worst_blowup = std::max(worst_blowup, row.remainder.blowup_fraction);
    if (e > 0) {
      const double prev = table.rows.back().remainder.estimate;
      row.ratio = row.remainder.estimate > 0.0 ? prev / row.remainder.estimate : kInf;
      ratios.push_back(*row.ratio);
    }
    values.push_back(row.remainder.estimate);
    table.rows.push_back(row);
  }
  table.pass = remainder_verdict(values, ratios, opts.tol_abs, opts.band_lo, opts.band_hi);
  if (worst_blowup > opts.max_blowup_fraction) {
    table.pass = false;
    std::ostringstream os;
    os << "blowup fraction " << worst_blowup << " exceeds " << opts.max_blowup_fraction;
    table.diagnostic = os.str();
  }
  return table;
}

StateVector unit_gaussian(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  StateVector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = normal(rng);
  return v / v.norm();
}

PathSample constant_path(const NoiseRealization& noise, const StateVector& value) {
  PathSample p(noise, value.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p.set_value(i, value);
    p.set_left_limit(i, value);
  }
  return p;
}

double sup_distance(const PathSample& a, const PathSample& b) {
  return path_sup(path_difference(a, b), Window{a.times().front(), a.times().back()});
}

}  // namespace

bool remainder_verdict(const std::vector<double>& remainders, const std::vector<double>& ratios,
                       double tol_abs, double lo, double hi) {
  if (remainders.empty()) return false;
  const bool all_small = std::all_of(remainders.begin(), remainders.end(),
                                     [&](double r) { return std::isfinite(r) && r <= tol_abs; });
  if (all_small) return true;
  for (std::size_t k = 1; k < remainders.size(); ++k) {
    if (!(remainders[k] < remainders[k - 1])) return false;
  }
  return std::all_of(ratios.begin(), ratios.end(), [&](double r) { return r >= lo && r <= hi; });
}

std::vector<StateVector> make_direction_set(std::size_t d, std::size_t count, std::uint64_t seed) {
  std::vector<StateVector> out;
  for (std::size_t k = 0; k < std::min(d, count); ++k) {
    out.push_back(StateVector::Unit(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)));
  }
  std::mt19937_64 rng(seed);
  while (out.size() < count) out.push_back(unit_gaussian(d, rng));
  return out;
}

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite exponent");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return parse_rational(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
}

RemainderTable gateaux_test(const Problem& problem, const StateVector& h,
                            const std::vector<double>& epsilons, const VerifyOptions& opts) {
  problem.validate();
  check_epsilons(epsilons);
  if (h.size() != static_cast<Eigen::Index>(problem.dim())) {
    throw std::invalid_argument("direction has the wrong dimension");
  }
  auto table = tabulate("gateaux", epsilons, quotient_remainders(problem, {h}, epsilons, opts), opts);
  table.direction = describe(h);
  table.q = opts.p;
  return table;
}

FrechetTable frechet_test(const Problem& problem, const std::vector<StateVector>& directions,
                          const std::vector<double>& epsilons, double q, const VerifyOptions& opts,
                          std::size_t min_directions) {
  if (directions.size() < std::max<std::size_t>(1, min_directions)) {
    throw std::invalid_argument("Frechet test needs at least " + std::to_string(min_directions) +
                                " directions");
  }
  if (!(q > opts.p)) throw std::invalid_argument("Frechet test needs q > p");
  for (const auto& h : directions) {
    if (h.norm() > 1.0 + 1e-12) throw std::invalid_argument("directions must lie in the unit ball");
  }
  FrechetTable out;
  for (const auto& h : directions) {
    out.per_direction.push_back(gateaux_test(problem, h, epsilons, opts));
    out.per_direction.back().q = q;
    if (!out.per_direction.back().diagnostic.empty() && out.diagnostic.empty()) {
      out.diagnostic = out.per_direction.back().diagnostic;
    }
  }
  std::vector<double> maxima;
  std::vector<double> ratios;
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    FrechetRow row{epsilons[e], -1.0, 0.0, 0, std::nullopt};
    for (std::size_t k = 0; k < directions.size(); ++k) {
      const auto& stat = out.per_direction[k].rows[e].remainder;
      if (stat.estimate > row.max_remainder) {
        row.max_remainder = stat.estimate;
        row.standard_error = stat.standard_error;
        row.argmax = k;
      }
    }
    if (e > 0) {
      const double prev = out.rows.back().max_remainder;
      row.ratio = row.max_remainder > 0.0 ? prev / row.max_remainder : kInf;
      ratios.push_back(*row.ratio);
    }
    maxima.push_back(row.max_remainder);
    out.rows.push_back(row);
  }
  out.pass = out.diagnostic.empty() &&
             remainder_verdict(maxima, ratios, opts.tol_abs, opts.band_lo, opts.band_hi);
  return out;
}

RemainderTable higher_order_test(const Problem& problem, const std::vector<StateVector>& directions,
                                 const std::vector<double>& epsilons, double q,
                                 const VerifyOptions& opts) {
  problem.validate();
  check_epsilons(epsilons);
  const int n = static_cast<int>(directions.size());
  if (n < 1 || n > 3) throw std::invalid_argument("higher-order test supports orders 1..3");
  if (n > problem.coefficients.max_order()) {
    throw DerivativeOrderError(n, problem.coefficients.max_order());
  }
  ExponentPlan::for_differentiability(n, rational_from_double(problem.coefficients.growth_degree()),
                                      rational_from_double(opts.p), rational_from_double(q));
  auto table = tabulate("higher", epsilons, quotient_remainders(problem, directions, epsilons, opts),
                        opts);
  table.direction = "order " + std::to_string(n);
  table.q = q;
  return table;
}

LipschitzTable lipschitz_test(const Problem& problem, std::size_t pairs,
                              const std::vector<double>& magnitudes, const VerifyOptions& opts,
                              std::uint64_t pair_seed) {
  problem.validate();
  if (pairs == 0 || magnitudes.empty()) throw std::invalid_argument("need pairs and magnitudes");
  std::mt19937_64 rng(pair_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  LipschitzTable table;
  double qmin = kInf;
  double qmax = 0.0;
  double worst_blowup = 0.0;
  for (std::size_t j = 0; j < pairs; ++j) {
    StateVector start = problem.u0;
    for (Eigen::Index k = 0; k < start.size(); ++k) start[k] += 0.5 * normal(rng);
    const StateVector e = unit_gaussian(problem.dim(), rng);

    std::vector<std::vector<double>> sups(magnitudes.size(), std::vector<double>(opts.paths, 0.0));
    parallel_for(opts.paths, opts.threads, [&](std::size_t m) {
      const MildStepper stepper(problem.op, problem.coefficients, problem.noise(m));
      const PathSample base = stepper.solve_mild(start);
      for (std::size_t k = 0; k < magnitudes.size(); ++k) {
        const PathSample moved = stepper.solve_mild(start + magnitudes[k] * e);
        sups[k][m] = base.blown_up() || moved.blown_up() ? kInf : sup_distance(moved, base);
      }
    });
    for (std::size_t k = 0; k < magnitudes.size(); ++k) {
      LipschitzRow row{j, magnitudes[k], sp_norm_from_sups(sups[k], opts.p, true), 0.0};
      worst_blowup = std::max(worst_blowup, row.distance.blowup_fraction);
      if (magnitudes[k] > 0.0) {
        row.quotient = row.distance.estimate / magnitudes[k];
        qmin = std::min(qmin, row.quotient);
        qmax = std::max(qmax, row.quotient);
      } else {
        row.quotient = std::numeric_limits<double>::quiet_NaN();
      }
      table.rows.push_back(row);
    }
  }
  table.spread = qmin > 0.0 && std::isfinite(qmin) ? qmax / qmin : kInf;
  table.pass = table.spread <= 10.0;
  if (worst_blowup > opts.max_blowup_fraction) {
    table.pass = false;
    table.diagnostic = "blowup fraction exceeds the limit";
  }
  return table;
}

ContractionTable contraction_diagnostic(const Problem& problem, const std::vector<double>& windows,
                                        std::uint64_t path_index, double p) {
  problem.validate();
  if (windows.empty()) throw std::invalid_argument("need at least one window length");
  const NoiseRealization full = problem.noise(path_index);
  const StateVector shift =
      StateVector::Ones(static_cast<Eigen::Index>(problem.dim())) / std::sqrt(static_cast<double>(problem.dim()));
  ContractionTable table;
  for (double t0 : windows) {
    if (!(t0 > 0.0) || t0 > problem.horizon * (1.0 + 1e-12)) {
      throw std::invalid_argument("contraction windows must lie in (0, T]");
    }
    const NoiseRealization noise = truncate(full, t0);
    const PathSample a = constant_path(noise, problem.u0);
    const PathSample b = constant_path(noise, problem.u0 + shift);
    const PathSample ga = mild_map(problem.op, problem.coefficients, problem.u0, a);
    const PathSample gb = mild_map(problem.op, problem.coefficients, problem.u0, b);
    const PathSample gga = mild_map(problem.op, problem.coefficients, problem.u0, ga);
    const PathSample ggb = mild_map(problem.op, problem.coefficients, problem.u0, gb);
    const double d1 = sup_distance(ga, gb);
    const double d2 = sup_distance(gga, ggb);
    const double factor = d1 > 0.0 ? std::pow(d2 / d1, std::min(1.0, p)) : 0.0;
    table.rows.push_back({t0, factor});
  }
  std::vector<ContractionRow> sorted = table.rows;
  std::sort(sorted.begin(), sorted.end(), [](auto x, auto y) { return x.window < y.window; });
  table.pass = sorted.front().factor < 1.0;
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k].factor < sorted[k - 1].factor) table.pass = false;
  }
  return table;
}

RemainderTable chainrule_test(const Problem& problem, Component which,
                              const std::vector<StateVector>& directions,
                              const std::vector<double>& epsilons, const VerifyOptions& opts) {
  problem.validate();
  check_epsilons(epsilons);
  const int n = static_cast<int>(directions.size()) - 1;
  if (n < 1) throw std::invalid_argument("chain-rule test needs at least two directions");
  if (n + 1 > problem.coefficients.max_order()) {
    throw DerivativeOrderError(n + 1, problem.coefficients.max_order());
  }
  const CoefficientField& field = problem.coefficients.component(which);
  const std::vector<StateVector> lower(directions.begin(), directions.end() - 1);
  const SubsetMask low_mask = (SubsetMask{1} << n) - 1;
  const SubsetMask up_mask = (SubsetMask{1} << (n + 1)) - 1;
  const SubsetMask last = SubsetMask{1} << n;
  const double z = 1.0;

  auto correction = [&](const SensitivitySystem& sys, SubsetMask target, std::size_t i,
                        std::vector<StateVector>& slot) {
    const StateVector u = sys.base.value(i);
    const double t = sys.base.times()[i];
    for (SubsetMask s = 1; s <= target; ++s) {
      if ((s & target) == s) slot[s] = sys.path(s).value(i);
    }
    auto deriv = [&](int order, std::span<const StateVector> dirs) {
      return field.derivative(order, t, z, u, dirs);
    };
    auto lookup = [&](SubsetMask m) -> const StateVector* { return &slot[m]; };
    return assemble_correction(deriv, target, lookup, field.rows(), field.cols());
  };

  std::vector<std::vector<double>> sups(epsilons.size(), std::vector<double>(opts.paths, 0.0));
  parallel_for(opts.paths, opts.threads, [&](std::size_t m) {
    const MildStepper stepper(problem.op, problem.coefficients, problem.noise(m));
    const SensitivitySystem up = stepper.solve_system(problem.u0, directions);
    std::vector<StateVector> slot(std::size_t{1} << (n + 1));
    const std::size_t steps = up.base.size();
    std::vector<FieldValue> reference(steps);
    std::vector<FieldValue> at_base(steps);
    bool blown = up.base.blown_up();
    for (SubsetMask s = 1; s <= up_mask && !blown; ++s) blown = up.path(s).blown_up();
    if (!blown) {
      for (std::size_t i = 0; i < steps; ++i) {
        const StateVector u = up.base.value(i);
        const StateVector pair[2] = {up.path(last).value(i), up.path(low_mask).value(i)};
        reference[i] = correction(up, up_mask, i, slot) -
                       field.derivative(2, up.base.times()[i], z, u, pair);
        at_base[i] = correction(up, low_mask, i, slot);
      }
    }
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      if (blown) {
        sups[e][m] = kInf;
        continue;
      }
      const SensitivitySystem moved =
          stepper.solve_system(problem.u0 + epsilons[e] * directions.back(), lower);
      if (moved.base.blown_up()) {
        sups[e][m] = kInf;
        continue;
      }
      double sup = 0.0;
      for (std::size_t i = 0; i < steps; ++i) {
        const FieldValue fd = (correction(moved, low_mask, i, slot) - at_base[i]) / epsilons[e];
        sup = std::max(sup, (fd - reference[i]).norm());
      }
      sups[e][m] = sup;
    }
  });
  auto table = tabulate("chainrule", epsilons, sups, opts);
  table.direction = std::string("component ") + component_name(which) + ", order " + std::to_string(n);
  return table;
}

}  // namespace spdesens
