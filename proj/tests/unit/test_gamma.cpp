#include "spdesens/gamma.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <functional>
#include <numbers>

using namespace spdesens;

namespace {

// Adaptive Simpson quadrature, independent of the tabulation used by the library.
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double oracle(double r) {
  auto f = [](double s) { return std::sin(s * s); };
  const double fa = f(0.0);
  const double fb = f(r);
  const double fm = f(0.5 * r);
  return simpson(f, 0.0, r, fa, fm, fb, r / 6.0 * (fa + 4.0 * fm + fb), 1e-13, 60);
}

}  // namespace

TEST_CASE("gamma values") {
  CHECK(gamma_eval(0.0, 0) == 0.0);
  CHECK(gamma_eval(std::sqrt(std::numbers::pi / 2.0), 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(gamma_eval(1.0, 0) - oracle(1.0)) <= 1e-10);
  CHECK(gamma_eval(1.0, 0) == doctest::Approx(0.3103).epsilon(1e-4));
}

TEST_CASE("gamma matches adaptive Simpson across the table and the tail") {
  for (double r : {0.013, 0.5, 1.7, 2.9, 3.33, 4.75, 5.99, 6.0, 6.01, 7.3, 9.9, 12.5}) {
    CAPTURE(r);
    CHECK(std::abs(gamma_eval(r, 0) - oracle(r)) <= 1e-10);
    CHECK(gamma_eval(-r, 0) == -gamma_eval(r, 0));
  }
}

TEST_CASE("gamma tends to sqrt(pi/8)") {
  const double limit = std::sqrt(std::numbers::pi / 8.0);
  CHECK(std::abs(gamma_eval(1000.0, 0) - limit) <= 1.0 / 2000.0);
}

TEST_CASE("gamma derivatives: closed forms and finite differences") {
  for (double r : {-2.3, -0.4, 0.0, 0.8, 1.9, 3.1, 5.5, 7.2}) {
    CAPTURE(r);
    CHECK(gamma_eval(r, 1) == doctest::Approx(std::sin(r * r)).epsilon(1e-15));
    CHECK(gamma_eval(r, 2) == doctest::Approx(2.0 * r * std::cos(r * r)).epsilon(1e-14));
    const double h = 1e-5;
    for (int j = 2; j <= GammaFunction::kMaxOrder; ++j) {
      CAPTURE(j);
      const double fd = (gamma_eval(r + h, j - 1) - gamma_eval(r - h, j - 1)) / (2.0 * h);
      const double exact = gamma_eval(r, j);
      const double scale = std::max(1.0, std::abs(exact));
      CHECK(std::abs(fd - exact) / scale <= 1e-6 * std::pow(1.0 + r * r, j / 2.0));
    }
  }
}

TEST_CASE("gamma rejects bad orders and huge arguments") {
  CHECK_THROWS_AS(gamma_eval(1.0, -1), std::out_of_range);
  CHECK_THROWS_AS(gamma_eval(1.0, GammaFunction::kMaxOrder + 1), std::out_of_range);
  CHECK_THROWS_AS(gamma_eval(2e6, 0), std::out_of_range);
  CHECK_THROWS(GammaFunction(0.0, 0.1));
}
