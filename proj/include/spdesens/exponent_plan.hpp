#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spdesens {

using Rational = boost::rational<std::int64_t>;

/// Positive exponent, possibly +infinity (1 / inf = 0).
struct Exponent {
  Rational value{1};
  bool infinite = false;

  static Exponent finite(Rational v) { return {v, false}; }
  static Exponent inf() { return {Rational{1}, true}; }
  Rational reciprocal() const { return infinite ? Rational{0} : Rational{1} / value; }
  std::string to_string() const;
};

/// Parses "3", "1.25", "-2e-1", "7/3" exactly; "inf" is rejected here (see
/// parse_exponent). Throws std::invalid_argument.
Rational parse_rational(std::string_view text);
/// As parse_rational, but also accepts "inf".
Exponent parse_exponent(std::string_view text);
std::string to_string(const Rational& r);

/// (m+n)! / (m+1)! = prod_{k=2}^{n} (m + k); equals 1 for n = 1.
Rational factorial_ratio(int n, const Rational& m);

struct PlanConstraint {
  std::string name;
  std::string inequality;  // human-readable, with the numbers substituted
  Rational lhs;
  Rational rhs;
  bool strict = false;
  bool holds = false;
  bool lhs_infinite = false;  // lhs is +inf; `lhs` then holds no value
};

struct PlanReport {
  std::vector<PlanConstraint> constraints;
  bool pass = true;
  /// The violated constraint, or the tightest one when all hold.
  std::string binding;
};

/// Evaluates the differentiability threshold q > (m+n)!/(m+1)! p, the
/// threshold q > (n + nm - m) p, and, when p0..pn are supplied, the
/// integrability budget (n-1)/p0 + sum 1/p_i <= 1/p together with its
/// consequences q >= np and p0 >= (n-1)p when p_1 = ... = p_n = q.
/// Throws std::invalid_argument for n < 1, m < 0 or nonpositive exponents.
PlanReport exponent_plan_check(int n, const Rational& m, const Rational& p, const Rational& q,
                               const std::optional<std::vector<Exponent>>& p0_to_pn = std::nullopt);

class PlanViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exponents for an order-n sensitivity run.
class ExponentPlan {
 public:
  /// Enforces q > (m+n)!/(m+1)! p.
  static ExponentPlan for_differentiability(int n, Rational m, Rational p, Rational q);
  /// Enforces (n-1)/p0 + sum_i 1/p_i <= 1/p.
  static ExponentPlan for_recursion(int n, Rational m, Rational p, Exponent p0,
                                    std::vector<Exponent> p_i);

  int n() const { return n_; }
  const Rational& m() const { return m_; }
  const Rational& p() const { return p_; }
  const Rational& q() const { return q_; }
  const std::vector<Exponent>& budget() const { return budget_; }  // p0, p1..pn

 private:
  ExponentPlan() = default;
  int n_ = 1;
  Rational m_{0};
  Rational p_{1};
  Rational q_{1};
  std::vector<Exponent> budget_;
};

}  // namespace spdesens
