#include "spdesens/gamma.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spdesens {
namespace {

// d^{j-1}/dr^{j-1} sin(r^2) = P_j(r) sin(r^2) + Q_j(r) cos(r^2); coefficients
// in increasing powers of r, j = 1..9.
struct TrigPoly {
  std::array<double, 9> sin_coeffs;
  std::array<double, 9> cos_coeffs;
};

constexpr std::array<TrigPoly, GammaFunction::kMaxOrder> kDerivatives = {{
    {{1}, {0}},
    {{0}, {0, 2}},
    {{0, 0, -4}, {2}},
    {{0, -12}, {0, 0, 0, -8}},
    {{-12, 0, 0, 0, 16}, {0, 0, -48}},
    {{0, 0, 0, 160}, {0, -120, 0, 0, 0, 32}},
    {{0, 0, 720, 0, 0, 0, -64}, {-120, 0, 0, 0, 480}},
    {{0, 1680, 0, 0, 0, -1344}, {0, 0, 0, 3360, 0, 0, 0, -128}},
    {{1680, 0, 0, 0, -13440, 0, 0, 0, 256}, {0, 0, 13440, 0, 0, 0, -3584}},
}};

double horner(const std::array<double, 9>& c, double r) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * r + *it;
  return acc;
}

// int_r^inf sin(s^2) ds for r >= 6 from the asymptotic expansion
// int_r^inf e^{i s^2} ds ~ -(e^{i r^2} / (2 i r)) sum_k (2k-1)!! / (2 i r^2)^k.
double fresnel_tail(double r) {
  const double r2 = r * r;
  double re = 1.0;  // running sum, complex
  double im = 0.0;
  double term_re = 1.0;
  double term_im = 0.0;
  for (int k = 1; k < 40; ++k) {
    // term *= (2k-1) / (2 i r^2) = -i (2k-1) / (2 r^2)
    const double s = (2.0 * k - 1.0) / (2.0 * r2);
    const double nre = term_im * s;
    const double nim = -term_re * s;
    term_re = nre;
    term_im = nim;
    if (std::abs(term_re) + std::abs(term_im) < 1e-18) break;
    re += term_re;
    im += term_im;
  }
  // -(cos + i sin)(re + i im) / (2 i r) = i (cos + i sin)(re + i im) / (2 r)
  const double c = std::cos(r2);
  const double sn = std::sin(r2);
  const double prod_re = c * re - sn * im;
  // Im[i (prod_re + i prod_im) / (2r)] = prod_re / (2r)
  return prod_re / (2.0 * r);
}

}  // namespace

GammaFunction::GammaFunction(double table_range, double table_step)
    : range_(table_range), step_(table_step) {
  if (!(table_range > 0.0) || !(table_step > 0.0) || table_step > table_range) {
    throw std::invalid_argument("gamma table needs 0 < step <= range");
  }
  const auto cells = static_cast<std::size_t>(std::ceil(range_ / step_));
  range_ = static_cast<double>(cells) * step_;
  table_.assign(cells + 1, 0.0);
  auto integrand = [](double s) { return std::sin(s * s); };
  for (std::size_t k = 0; k < cells; ++k) {
    const double a = static_cast<double>(k) * step_;
    table_[k + 1] = table_[k] +
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, a, a + step_, 5, 1e-15);
  }
}

const GammaFunction& GammaFunction::standard() {
  static const GammaFunction instance;
  return instance;
}

double GammaFunction::value(double r) const {
  const double x = std::abs(r);
  const double sign = r < 0.0 ? -1.0 : 1.0;
  if (x >= range_) {
    return sign * (std::sqrt(std::numbers::pi / 8.0) - fresnel_tail(x));
  }
  const auto k = static_cast<std::size_t>(x / step_);
  const double x0 = static_cast<double>(k) * step_;
  const double x1 = x0 + step_;
  const double t = (x - x0) / step_;
  const double h = step_;
  const double d0 = std::sin(x0 * x0);
  const double d1 = std::sin(x1 * x1);
  const double dd0 = 2.0 * x0 * std::cos(x0 * x0);
  const double dd1 = 2.0 * x1 * std::cos(x1 * x1);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t3 * t;
  const double t5 = t4 * t;
  // Quintic Hermite basis.
  const double h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
  const double h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
  const double h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
  const double h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
  const double h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
  const double h5 = 0.5 * (t3 - 2.0 * t4 + t5);
  const double v = h0 * table_[k] + h1 * h * d0 + h2 * h * h * dd0 + h3 * table_[k + 1] +
                   h4 * h * d1 + h5 * h * h * dd1;
  return sign * v;
}

double GammaFunction::operator()(double r, int order) const {
  if (!(std::abs(r) <= kMaxArgument)) {
    throw std::out_of_range("gamma argument outside the tabulated range |r| <= 1e6: " +
                            std::to_string(r));
  }
  if (order < 0 || order > kMaxOrder) {
    throw std::out_of_range("gamma derivative order " + std::to_string(order) +
                            " not available (max " + std::to_string(kMaxOrder) + ")");
  }
  if (order == 0) return value(r);
  const auto& poly = kDerivatives[static_cast<std::size_t>(order - 1)];
  const double r2 = r * r;
  return horner(poly.sin_coeffs, r) * std::sin(r2) + horner(poly.cos_coeffs, r) * std::cos(r2);
}

double gamma_eval(double r, int order) { return GammaFunction::standard()(r, order); }

}  // namespace spdesens
