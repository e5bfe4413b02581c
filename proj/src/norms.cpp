#include "spdesens/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace spdesens {
namespace {

void check_window(Window w) {
  if (!(w.t0 <= w.t1)) throw std::invalid_argument("window needs t0 <= t1");
}

void check_order(double p, const char* what) {
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw std::invalid_argument(std::string(what) + " must be a finite positive exponent");
  }
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double overlap(double a, double b, Window w) {
  return std::max(0.0, std::min(b, w.t1) - std::max(a, w.t0));
}

}  // namespace

double bootstrap_se(std::size_t paths,
                    const std::function<double(std::span<const std::size_t>)>& statistic,
                    int resamples, std::uint64_t seed) {
  if (paths == 0) throw std::invalid_argument("bootstrap over an empty ensemble");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, paths - 1);
  std::vector<std::size_t> idx(paths);
  std::vector<double> reps;
  reps.reserve(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    for (auto& i : idx) i = pick(rng);
    reps.push_back(statistic(idx));
  }
  return sample_sd(reps);
}

double bootstrap_se(std::span<const double> samples,
                    const std::function<double(std::span<const double>)>& statistic,
                    int resamples, std::uint64_t seed) {
  std::vector<double> buf(samples.size());
  return bootstrap_se(
      samples.size(),
      [&](std::span<const std::size_t> idx) {
        for (std::size_t k = 0; k < idx.size(); ++k) buf[k] = samples[idx[k]];
        return statistic(buf);
      },
      resamples, seed);
}

double path_sup(const PathSample& path, Window window) {
  check_window(window);
  if (path.blown_up()) return std::numeric_limits<double>::infinity();
  const auto& t = path.times();
  double sup = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.t0 || t[i] > window.t1) continue;
    sup = std::max(sup, path.value(i).norm());
    if (path.is_jump(i) && t[i] > window.t0) sup = std::max(sup, path.left_limit(i).norm());
  }
  return sup;
}

EnsembleStatistic sp_norm_from_sups(std::span<const double> sups, double p, bool exclude_blowup) {
  check_order(p, "S^p order");
  if (sups.empty()) throw std::invalid_argument("S^p norm of an empty ensemble");
  std::vector<double> powered;
  powered.reserve(sups.size());
  std::size_t blown = 0;
  for (double s : sups) {
    if (!std::isfinite(s)) {
      ++blown;
      continue;
    }
    powered.push_back(std::pow(s, p));
  }
  EnsembleStatistic st;
  st.p = p;
  st.paths = sups.size();
  st.blowup_fraction = static_cast<double>(blown) / static_cast<double>(sups.size());
  if ((blown > 0 && !exclude_blowup) || powered.empty()) {
    st.estimate = std::numeric_limits<double>::infinity();
    st.standard_error = std::numeric_limits<double>::quiet_NaN();
    return st;
  }
  auto stat = [p](std::span<const double> x) {
    return std::pow(std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()),
                    1.0 / p);
  };
  st.estimate = stat(powered);
  st.standard_error = bootstrap_se(powered, stat);
  return st;
}

EnsembleStatistic sp_norm(std::span<const PathSample> paths, double p, Window window) {
  std::vector<double> sups;
  sups.reserve(paths.size());
  for (const auto& path : paths) sups.push_back(path_sup(path, window));
  return sp_norm_from_sups(sups, p);
}

double dp_metric(std::span<const PathSample> first, std::span<const PathSample> second, double p,
                 Window window) {
  if (first.size() != second.size()) {
    throw std::invalid_argument("d_p needs ensembles of equal size");
  }
  std::vector<double> sups;
  sups.reserve(first.size());
  for (std::size_t m = 0; m < first.size(); ++m) {
    if (!first[m].noise().same_realization(second[m].noise())) {
      throw std::invalid_argument("d_p needs paired ensembles driven by the same noise");
    }
    sups.push_back(path_sup(path_difference(first[m], second[m]), window));
  }
  const double norm = sp_norm_from_sups(sups, p).estimate;
  return std::pow(norm, std::min(1.0, p));
}

MarkFieldSample sample_mark_field(const CoefficientField& field, const PathSample& path,
                                  const std::vector<MarkNode>& nodes) {
  MarkFieldSample out;
  out.times = path.times();
  out.norms.resize(static_cast<Eigen::Index>(path.size()), static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < path.size(); ++i) {
    // The integrand is evaluated at the left limit (predictable version).
    const StateVector x = path.left_limit(i);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      out.norms(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q)) =
          field.value(out.times[i], nodes[q].mark, x).norm();
    }
  }
  return out;
}

double nu_integral(const MarkFieldSample& sample, const std::vector<MarkNode>& nodes,
                   double intensity, double q, Window window) {
  check_window(window);
  if (static_cast<std::size_t>(sample.norms.cols()) != nodes.size()) {
    throw std::invalid_argument("mark field has the wrong number of mark nodes");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < sample.times.size(); ++i) {
    const double len = overlap(sample.times[i], sample.times[i + 1], window);
    if (len <= 0.0) continue;
    double inner = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      inner += nodes[k].weight *
               std::pow(sample.norms(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)), q);
    }
    acc += len * intensity * inner;
  }
  return acc;
}

EnsembleStatistic lpq_nu_norm(const MarkFieldEnsemble& field, double p, double q, Window window) {
  check_order(p, "p");
  check_order(q, "q");
  if (field.paths.empty()) throw std::invalid_argument("L^p(L^q) norm of an empty ensemble");
  std::vector<double> powered;
  powered.reserve(field.paths.size());
  for (const auto& s : field.paths) {
    powered.push_back(std::pow(nu_integral(s, field.nodes, field.intensity, q, window), p / q));
  }
  auto stat = [p](std::span<const double> x) {
    return std::pow(std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()),
                    1.0 / p);
  };
  EnsembleStatistic st;
  st.p = p;
  st.paths = powered.size();
  st.estimate = stat(powered);
  st.standard_error = bootstrap_se(powered, stat);
  return st;
}

EnsembleStatistic gp_norm(const MarkFieldEnsemble& field,
                          const std::optional<std::pair<MarkFieldEnsemble, MarkFieldEnsemble>>& split,
                          double p, Window window) {
  check_order(p, "G^p order");
  if (p <= 1.0) return lpq_nu_norm(field, p, 2.0, window);

  const bool use_split = p < 2.0;
  if (use_split && !split) {
    throw std::invalid_argument("G^p with 1 < p < 2 needs an explicit split g = g1 + g2");
  }
  const MarkFieldEnsemble& a = use_split ? split->first : field;
  const MarkFieldEnsemble& b = use_split ? split->second : field;
  if (a.paths.size() != b.paths.size() || a.paths.empty()) {
    throw std::invalid_argument("G^p split components must have the same nonempty ensemble size");
  }
  const std::size_t m = a.paths.size();
  std::vector<double> pa(m);
  std::vector<double> pb(m);
  for (std::size_t k = 0; k < m; ++k) {
    pa[k] = std::pow(nu_integral(a.paths[k], a.nodes, a.intensity, 2.0, window), p / 2.0);
    pb[k] = std::pow(nu_integral(b.paths[k], b.nodes, b.intensity, p, window), 1.0);
  }
  auto stat = [&](std::span<const std::size_t> idx) {
    double sa = 0.0;
    double sb = 0.0;
    for (auto i : idx) {
      sa += pa[i];
      sb += pb[i];
    }
    const double n = static_cast<double>(idx.size());
    return std::pow(sa / n, 1.0 / p) + std::pow(sb / n, 1.0 / p);
  };
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), std::size_t{0});
  EnsembleStatistic st;
  st.p = p;
  st.paths = m;
  st.estimate = stat(all);
  st.standard_error = bootstrap_se(m, stat);
  st.upper_bound = use_split;
  return st;
}

KappaAudit kappa_audit(const MarkFieldSample& g1, const MarkFieldSample& g2,
                       const std::vector<MarkNode>& nodes, double intensity,
                       std::span<const double> deltas, double p) {
  check_order(p, "p");
  if (g1.times != g2.times) throw std::invalid_argument("kappa audit needs g1, g2 on one grid");
  const auto& t = g1.times;
  const double horizon = t.back();
  KappaAudit audit;
  for (double delta : deltas) {
    if (!(delta >= 0.0)) throw std::invalid_argument("window lengths must be nonnegative");
    double best = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] + delta > horizon * (1.0 + 1e-12)) break;
      const Window w{t[i], std::min(horizon, t[i] + delta)};
      double lhs = std::sqrt(nu_integral(g2, nodes, intensity, 2.0, w));
      if (p > 1.0) lhs += std::pow(nu_integral(g1, nodes, intensity, p, w), 1.0 / p);
      best = std::max(best, lhs);
    }
    audit.rows.push_back({delta, best});
  }
  // Check monotonicity along decreasing window length.
  std::vector<KappaRow> sorted = audit.rows;
  std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return a.delta > b.delta; });
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k].value > sorted[k - 1].value * (1.0 + 1e-12)) audit.monotone = false;
  }
  return audit;
}

KappaAudit kappa_audit(const MarkFieldSample& g, const std::vector<MarkNode>& nodes,
                       double intensity, std::span<const double> deltas, double p) {
  if (p > 1.0 && p < 2.0) {
    throw std::invalid_argument("for 1 < p < 2 the window condition needs an explicit split");
  }
  MarkFieldSample half = g;
  half.norms *= 0.5;
  return kappa_audit(half, half, nodes, intensity, deltas, p);
}

}  // namespace spdesens
