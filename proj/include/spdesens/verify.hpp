#pragma once

#include "spdesens/exponent_plan.hpp"
#include "spdesens/norms.hpp"
#include "spdesens/problem.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spdesens {

struct VerifyOptions {
  std::size_t paths = 1000;
  int threads = 1;
  double p = 2.0;
  /// Absolute remainder tolerance under which a table passes outright.
  double tol_abs = 1e-12;
  /// Acceptance band for consecutive remainder ratios r(eps_k-1) / r(eps_k).
  double band_lo = 1.5;
  double band_hi = 2.5;
  /// Runs with more blown-up paths than this fraction fail.
  double max_blowup_fraction = 0.01;
};

struct RemainderRow {
  double epsilon;
  EnsembleStatistic remainder;
  std::optional<double> ratio;  // remainder at the previous (larger) epsilon over this one
};

struct RemainderTable {
  std::string test;
  std::string direction;
  double p = 2.0;
  double q = 2.0;
  std::vector<RemainderRow> rows;
  bool pass = false;
  std::string diagnostic;
};

struct FrechetRow {
  double epsilon;
  double max_remainder;
  double standard_error;  // of the maximizing direction
  std::size_t argmax;
  std::optional<double> ratio;
};

struct FrechetTable {
  std::vector<FrechetRow> rows;
  std::vector<RemainderTable> per_direction;
  bool pass = false;
  std::string diagnostic;
};

struct LipschitzRow {
  std::size_t pair;
  double magnitude;
  EnsembleStatistic distance;
  double quotient;
};

struct LipschitzTable {
  std::vector<LipschitzRow> rows;
  double spread = 0.0;  // max quotient / min quotient over rows with magnitude > 0
  bool pass = false;
  std::string diagnostic;
};

struct ContractionRow {
  double window;
  double factor;
};

struct ContractionTable {
  std::vector<ContractionRow> rows;
  bool pass = false;
};

/// Verdict for a remainder sequence at decreasing epsilons: every value at
/// most tol_abs, or strictly decreasing with every ratio inside the band.
bool remainder_verdict(const std::vector<double>& remainders, const std::vector<double>& ratios,
                       double tol_abs, double lo, double hi);

/// Coordinate axes first, then Gaussian directions normalized to unit length.
std::vector<StateVector> make_direction_set(std::size_t d, std::size_t count, std::uint64_t seed);

/// r(eps) = |eps^{-1}(u(u0 + eps h) - u(u0)) - y|_{S^p} with y the first
/// variation in direction h, all on common noise.
RemainderTable gateaux_test(const Problem& problem, const StateVector& h,
                            const std::vector<double>& epsilons, const VerifyOptions& opts);

/// Maximum over the direction set of the Gateaux remainder. Requires
/// q > p, |h| <= 1 and at least min_directions directions.
FrechetTable frechet_test(const Problem& problem, const std::vector<StateVector>& directions,
                          const std::vector<double>& epsilons, double q, const VerifyOptions& opts,
                          std::size_t min_directions = 8);

/// r(eps) = |eps^{-1}[u^{(n-1)}(u0 + eps h_n)(h_1..h_{n-1}) - u^{(n-1)}(u0)(h_1..h_{n-1})]
///            - u^{(n)}(u0)(h_1..h_n)|_{S^p}.
/// The exponent q must satisfy q > (m+n)!/(m+1)! p for the growth degree m
/// of the coefficients; a violation throws PlanViolation.
RemainderTable higher_order_test(const Problem& problem, const std::vector<StateVector>& directions,
                                 const std::vector<double>& epsilons, double q,
                                 const VerifyOptions& opts);

/// Distances |u(a) - u(a + delta e)|_{S^p} / delta over random pairs and a
/// ladder of magnitudes. Passes when the quotient spread is at most 10.
LipschitzTable lipschitz_test(const Problem& problem, std::size_t pairs,
                              const std::vector<double>& magnitudes, const VerifyOptions& opts,
                              std::uint64_t pair_seed = 17);

/// Empirical contraction factor of the discrete mild map on [0, T0] along
/// one frozen noise path: d_p(G^2 a, G^2 b) / d_p(G a, G b) for two constant
/// starting paths.
ContractionTable contraction_diagnostic(const Problem& problem, const std::vector<double>& windows,
                                        std::uint64_t path_index, double p);

/// Finite difference of the order-n correction of `which` along the
/// variational flow in direction h_{n+1}, against
/// correction_{n+1} - D^2F(u)(u'(h_{n+1}), u^{(n)}(h_1..h_n)).
RemainderTable chainrule_test(const Problem& problem, Component which,
                              const std::vector<StateVector>& directions,
                              const std::vector<double>& epsilons, const VerifyOptions& opts);

/// Nearest exact rational for a double given in decimal (shortest round-trip form).
Rational rational_from_double(double x);

}  // namespace spdesens
