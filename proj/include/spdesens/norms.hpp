#pragma once

#include "spdesens/noise.hpp"
#include "spdesens/solver.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spdesens {

struct Window {
  double t0;
  double t1;
};

/// Monte Carlo estimate with a nonparametric bootstrap standard error.
struct EnsembleStatistic {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t paths = 0;
  double p = 0.0;
  /// Fraction of paths flagged as blown up; estimate is +inf when positive
  /// unless such paths were excluded.
  double blowup_fraction = 0.0;
  /// Set when the value is an upper bound (G^p with a supplied split).
  bool upper_bound = false;
};

inline constexpr int kBootstrapResamples = 200;
inline constexpr std::uint64_t kBootstrapSeed = 0x5eedb007ULL;

/// Bootstrap SE of `statistic`, which maps a resampled multiset of path
/// indices to a value. Resampling uses its own seeded generator.
double bootstrap_se(std::size_t paths, const std::function<double(std::span<const std::size_t>)>& statistic,
                    int resamples = kBootstrapResamples, std::uint64_t seed = kBootstrapSeed);

/// Bootstrap SE of a statistic of a scalar sample.
double bootstrap_se(std::span<const double> samples,
                    const std::function<double(std::span<const double>)>& statistic,
                    int resamples = kBootstrapResamples, std::uint64_t seed = kBootstrapSeed);

/// sup of |Y(t)| over grid points in [t0, t1] and left limits in (t0, t1].
/// +inf for blown-up paths.
double path_sup(const PathSample& path, Window window);

/// (mean sup^p)^{1/p} from per-path suprema. Non-finite entries count as
/// blowups; they are dropped when exclude_blowup is set.
EnsembleStatistic sp_norm_from_sups(std::span<const double> sups, double p,
                                    bool exclude_blowup = false);

/// S^p(t0, t1) norm of an ensemble of paths.
EnsembleStatistic sp_norm(std::span<const PathSample> paths, double p, Window window);

/// d_p(Y1, Y2) = |Y1 - Y2|_{S^p}^{min(1, p)} for ensembles sharing noise path
/// by path. Throws std::invalid_argument for unpaired ensembles.
double dp_metric(std::span<const PathSample> first, std::span<const PathSample> second, double p,
                 Window window);

/// |g(t_i, z_q)| for one path on its grid, one column per mark node.
struct MarkFieldSample {
  std::vector<double> times;
  Eigen::MatrixXd norms;  // (N+1) x nodes
};

/// Samples of a predictable field g on grid x marks for an ensemble.
struct MarkFieldEnsemble {
  std::vector<MarkNode> nodes;
  double intensity = 0.0;
  std::vector<MarkFieldSample> paths;
};

/// Tabulates |F(t_i, z_q, x_i-)| along a path; the left-point value of each
/// grid cell is used for integrals over that cell.
MarkFieldSample sample_mark_field(const CoefficientField& field, const PathSample& path,
                                  const std::vector<MarkNode>& nodes);

/// int_window sum_q lambda w_q |g|^q dt for one path (left-point rule on cells).
double nu_integral(const MarkFieldSample& sample, const std::vector<MarkNode>& nodes,
                   double intensity, double q, Window window);

/// |g|_{L^p(Omega; L^q(nu; H))} restricted to the window.
EnsembleStatistic lpq_nu_norm(const MarkFieldEnsemble& field, double p, double q, Window window);

/// G^p quasi-norm. p <= 1: L^p(L^2). 1 < p < 2: |g1|_{L^p(L^2)} + |g2|_{L^p(L^p)}
/// for the supplied split (an upper bound for the infimum; flagged). p >= 2:
/// both norms of g. Throws std::invalid_argument when 1 < p < 2 and no split.
EnsembleStatistic gp_norm(const MarkFieldEnsemble& field,
                          const std::optional<std::pair<MarkFieldEnsemble, MarkFieldEnsemble>>& split,
                          double p, Window window);

struct KappaRow {
  double delta;
  double value;
};

struct KappaAudit {
  std::vector<KappaRow> rows;  // in the order of the requested window lengths
  /// Values do not increase as the window shrinks.
  bool monotone = true;
};

/// Largest left-hand side of the window condition
///   1_{p>1} (int g1^p dnu)^{1/p} + (int g2^2 dnu)^{1/2}
/// over windows [t0, t0 + delta] with t0 on the grid, for deterministic g1, g2.
KappaAudit kappa_audit(const MarkFieldSample& g1, const MarkFieldSample& g2,
                       const std::vector<MarkNode>& nodes, double intensity,
                       std::span<const double> deltas, double p);

/// Same with g1 = g2 = g / 2. Throws std::invalid_argument for 1 < p < 2,
/// where a split must be supplied.
KappaAudit kappa_audit(const MarkFieldSample& g, const std::vector<MarkNode>& nodes,
                       double intensity, std::span<const double> deltas, double p);

}  // namespace spdesens
