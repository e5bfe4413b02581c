#include "spdesens/exponent_plan.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <sstream>

namespace spdesens {
namespace {

std::int64_t pow10(int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > std::numeric_limits<std::int64_t>::max() / 10) {
      throw std::invalid_argument("exponent too large for exact arithmetic");
    }
    r *= 10;
  }
  return r;
}

Rational parse_decimal(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty number");
  bool neg = false;
  std::size_t i = 0;
  if (s[0] == '+' || s[0] == '-') {
    neg = s[0] == '-';
    ++i;
  }
  std::int64_t mant = 0;
  int frac_digits = 0;
  bool seen_dot = false;
  bool any_digit = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      if (mant > (std::numeric_limits<std::int64_t>::max() - 9) / 10) {
        throw std::invalid_argument("too many digits for exact arithmetic: " + std::string(s));
      }
      mant = mant * 10 + (c - '0');
      if (seen_dot) ++frac_digits;
      any_digit = true;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if (c == 'e' || c == 'E') {
      break;
    } else {
      throw std::invalid_argument("not a number: " + std::string(s));
    }
  }
  if (!any_digit) throw std::invalid_argument("not a number: " + std::string(s));
  int exp10 = 0;
  if (i < s.size()) {
    const std::string rest(s.substr(i + 1));
    std::size_t used = 0;
    try {
      exp10 = std::stoi(rest, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad exponent in " + std::string(s));
    }
    if (used != rest.size()) throw std::invalid_argument("bad exponent in " + std::string(s));
  }
  exp10 -= frac_digits;
  Rational r = exp10 >= 0 ? Rational(mant * pow10(exp10)) : Rational(mant, pow10(-exp10));
  return neg ? -r : r;
}

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

PlanConstraint make(std::string name, std::string lhs_text, Rational lhs, std::string rhs_text,
                    Rational rhs, bool strict) {
  PlanConstraint c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.strict = strict;
  c.holds = strict ? lhs > rhs : lhs >= rhs;
  c.inequality = lhs_text + " = " + to_string(lhs) + (strict ? " > " : " >= ") + rhs_text +
                 " = " + to_string(rhs);
  return c;
}

void check_inputs(int n, const Rational& m, const Rational& p) {
  if (n < 1) throw std::invalid_argument("order n must be at least 1");
  if (m < Rational{0}) throw std::invalid_argument("growth degree m must be nonnegative");
  if (p <= Rational{0}) throw std::invalid_argument("exponent p must be positive");
}

}  // namespace

std::string to_string(const Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << '/' << r.denominator();
  return os.str();
}

std::string Exponent::to_string() const { return infinite ? "inf" : spdesens::to_string(value); }

Rational parse_rational(std::string_view text) {
  const std::string s = trim(text);
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    const Rational num = parse_decimal(trim(std::string_view(s).substr(0, slash)));
    const Rational den = parse_decimal(trim(std::string_view(s).substr(slash + 1)));
    if (den == Rational{0}) throw std::invalid_argument("zero denominator in " + s);
    return num / den;
  }
  return parse_decimal(s);
}

Exponent parse_exponent(std::string_view text) {
  const std::string s = trim(text);
  if (s == "inf" || s == "+inf" || s == "infinity") return Exponent::inf();
  return Exponent::finite(parse_rational(s));
}

Rational factorial_ratio(int n, const Rational& m) {
  Rational r{1};
  for (int k = 2; k <= n; ++k) r *= m + k;
  return r;
}

PlanReport exponent_plan_check(int n, const Rational& m, const Rational& p, const Rational& q,
                               const std::optional<std::vector<Exponent>>& p0_to_pn) {
  check_inputs(n, m, p);
  if (q <= Rational{0}) throw std::invalid_argument("exponent q must be positive");
  PlanReport report;
  const Rational fr = factorial_ratio(n, m);
  report.constraints.push_back(
      make("factorial_bound", "q", q, "(m+n)!/(m+1)! * p", fr * p, true));
  const Rational lin = Rational(n) + Rational(n) * m - m;
  report.constraints.push_back(make("remark_bound", "q", q, "(n+nm-m) * p", lin * p, true));

  if (p0_to_pn) {
    const auto& e = *p0_to_pn;
    if (e.size() != static_cast<std::size_t>(n) + 1) {
      throw std::invalid_argument("expected p0..pn, i.e. " + std::to_string(n + 1) + " exponents");
    }
    for (const auto& x : e) {
      if (!x.infinite && x.value <= Rational{0}) throw std::invalid_argument("exponents must be positive");
    }
    Rational budget = Rational(n - 1) * e[0].reciprocal();
    for (std::size_t i = 1; i < e.size(); ++i) budget += e[i].reciprocal();
    report.constraints.push_back(
        make("recursion_budget", "1/p", Rational{1} / p, "(n-1)/p0 + sum 1/p_i", budget, false));
    const bool all_q = std::all_of(e.begin() + 1, e.end(),
                                   [&](const Exponent& x) { return !x.infinite && x.value == q; });
    if (all_q) {
      report.constraints.push_back(make("equal_exponents_q", "q", q, "n * p", Rational(n) * p, false));
      if (e[0].infinite) {
        PlanConstraint c;
        c.name = "equal_exponents_p0";
        c.inequality = "p0 = inf >= (n-1) * p = " + to_string(Rational(n - 1) * p);
        c.rhs = Rational(n - 1) * p;
        c.lhs_infinite = true;
        c.holds = true;
        report.constraints.push_back(c);
      } else {
        report.constraints.push_back(
            make("equal_exponents_p0", "p0", e[0].value, "(n-1) * p", Rational(n - 1) * p, false));
      }
    }
  }

  const PlanConstraint* binding = nullptr;
  for (const auto& c : report.constraints) {
    if (!c.holds) {
      report.pass = false;
      if (!binding || binding->holds) binding = &c;
    }
  }
  if (report.pass) {
    // Tightest constraint: smallest relative slack (lhs - rhs) / lhs.
    Rational best{2};
    for (const auto& c : report.constraints) {
      if (c.lhs_infinite || c.lhs == Rational{0}) continue;
      const Rational slack = (c.lhs - c.rhs) / c.lhs;
      if (!binding || slack < best) {
        best = slack;
        binding = &c;
      }
    }
  }
  if (binding) report.binding = binding->name + ": " + binding->inequality;
  return report;
}

ExponentPlan ExponentPlan::for_differentiability(int n, Rational m, Rational p, Rational q) {
  check_inputs(n, m, p);
  const Rational rhs = factorial_ratio(n, m) * p;
  if (!(q > rhs)) {
    throw PlanViolation("exponent plan violates q > (m+n)!/(m+1)! p: q = " + to_string(q) +
                        ", (m+n)!/(m+1)! p = " + to_string(rhs));
  }
  ExponentPlan plan;
  plan.n_ = n;
  plan.m_ = m;
  plan.p_ = p;
  plan.q_ = q;
  return plan;
}

ExponentPlan ExponentPlan::for_recursion(int n, Rational m, Rational p, Exponent p0,
                                         std::vector<Exponent> p_i) {
  check_inputs(n, m, p);
  if (p_i.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("need exactly n exponents p_1..p_n");
  }
  Rational budget = Rational(n - 1) * p0.reciprocal();
  for (const auto& e : p_i) budget += e.reciprocal();
  if (budget > Rational{1} / p) {
    throw PlanViolation("exponent plan violates (n-1)/p0 + sum 1/p_i <= 1/p: " + to_string(budget) +
                        " > " + to_string(Rational{1} / p));
  }
  ExponentPlan plan;
  plan.n_ = n;
  plan.m_ = m;
  plan.p_ = p;
  plan.q_ = p_i.empty() || p_i.front().infinite ? p : p_i.front().value;
  plan.budget_.push_back(p0);
  plan.budget_.insert(plan.budget_.end(), p_i.begin(), p_i.end());
  return plan;
}

}  // namespace spdesens
