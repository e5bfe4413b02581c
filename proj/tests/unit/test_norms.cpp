#include "spdesens/norms.hpp"
#include "spdesens/problem.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace spdesens;

namespace {

PathSample constant_path(const NoiseRealization& noise, const StateVector& c) {
  PathSample path(noise, c.size());
  for (std::size_t i = 0; i < path.size(); ++i) path.set_value(i, c);
  return path;
}

std::vector<NoiseRealization> ou_noise(std::size_t M) {
  const auto pr = fixtures::ou_with_jumps(0.5, 0.3, 2.0, 1.0, 1e-2, 0.0);
  std::vector<NoiseRealization> out;
  for (std::uint64_t m = 0; m < M; ++m) out.push_back(pr.noise(m));
  return out;
}

std::vector<PathSample> ou_ensemble(double u0, const std::vector<NoiseRealization>& noise) {
  const auto pr = fixtures::ou_with_jumps(0.5, 0.3, 2.0, 1.0, 1e-2, u0);
  std::vector<PathSample> out;
  for (const auto& n : noise) out.push_back(solve_mild(pr.op, pr.coefficients, pr.u0, n));
  return out;
}

std::vector<PathSample> ou_ensemble(double u0, std::size_t M) { return ou_ensemble(u0, ou_noise(M)); }

MarkFieldSample constant_field(const std::vector<double>& times, std::size_t nodes, double c) {
  MarkFieldSample s;
  s.times = times;
  s.norms = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(times.size()),
                                      static_cast<Eigen::Index>(nodes), c);
  return s;
}

MarkFieldEnsemble scaled(MarkFieldEnsemble e, double a) {
  for (auto& p : e.paths) p.norms *= a;
  return e;
}

}  // namespace

TEST_CASE("S^p of a constant path is the constant") {
  const auto noise = sample_noise(MarkSpace::none(), 0, 1.0, 0.1, 1, 0);
  StateVector c(2);
  c << 3.0, 4.0;
  std::vector<PathSample> paths(7, constant_path(noise, c));
  for (double p : {0.5, 1.0, 2.0, 7.0}) {
    const auto s = sp_norm(paths, p, {0.0, 1.0});
    CHECK(s.estimate == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(s.standard_error == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(s.paths == 7);
  }
}

TEST_CASE("free-flow sup is attained at the window start") {
  const auto pr = fixtures::free_flow(1, 2.0, 1.0, 0.125);
  const auto path = solve_mild(pr.op, pr.coefficients, pr.u0, pr.noise(0));
  const std::vector<PathSample> paths{path};
  const auto s = sp_norm(paths, 2.0, {0.25, 1.0});
  CHECK(s.estimate == doctest::Approx(std::exp(-2.0 * 0.25)).epsilon(1e-14));
}

TEST_CASE("d_p examples and pairing") {
  const auto noise = sample_noise(MarkSpace::none(), 0, 1.0, 0.25, 1, 0);
  const std::vector<PathSample> zero{constant_path(noise, StateVector::Zero(1))};
  const std::vector<PathSample> a{constant_path(noise, StateVector::Constant(1, 0.3))};
  const std::vector<PathSample> b{constant_path(noise, StateVector::Constant(1, 4.0))};
  CHECK(dp_metric(a, a, 2.0, {0.0, 1.0}) == 0.0);
  CHECK(dp_metric(a, zero, 2.0, {0.0, 1.0}) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(dp_metric(b, zero, 0.5, {0.0, 1.0}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(dp_metric(a, b, 1.0, {0.0, 1.0}) == dp_metric(b, a, 1.0, {0.0, 1.0}));

  const auto other = sample_noise(MarkSpace::none(), 0, 1.0, 0.25, 1, 1);
  const std::vector<PathSample> c{constant_path(other, StateVector::Zero(1))};
  CHECK_THROWS_AS(dp_metric(a, c, 2.0, {0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(dp_metric(a, std::vector<PathSample>{}, 2.0, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("d_p triangle inequality and the quasi-triangle bound") {
  const auto noise = ou_noise(200);
  const auto y1 = ou_ensemble(1.0, noise);
  const auto y2 = ou_ensemble(-0.5, noise);
  const auto y3 = ou_ensemble(2.5, noise);
  const Window w{0.0, 1.0};
  for (double p : {0.5, 1.0, 2.0}) {
    CAPTURE(p);
    CHECK(dp_metric(y1, y3, p, w) <= dp_metric(y1, y2, p, w) + dp_metric(y2, y3, p, w) + 1e-12);
  }
  const double p = 0.5;
  std::vector<PathSample> diff;
  for (std::size_t m = 0; m < y1.size(); ++m) diff.push_back(path_difference(y1[m], y2[m]));
  CHECK(sp_norm(diff, p, w).estimate <=
        std::pow(2.0, 1.0 / p) * (sp_norm(y1, p, w).estimate + sp_norm(y2, p, w).estimate));
}

TEST_CASE("window monotonicity per path") {
  const auto paths = ou_ensemble(1.0, 50);
  for (const auto& path : paths) {
    CHECK(path_sup(path, {0.0, 0.5}) <= path_sup(path, {0.0, 1.0}));
    CHECK(path_sup(path, {0.2, 0.6}) <= path_sup(path, {0.1, 0.9}));
  }
  CHECK(sp_norm(paths, 2.0, {0.0, 0.5}).estimate <= sp_norm(paths, 2.0, {0.0, 1.0}).estimate);
}

TEST_CASE("L^p(L^q(nu)) of a constant field") {
  const double c = 1.7;
  const double lambda = 3.0;
  const double tau = 0.5;
  std::vector<double> times;
  for (int i = 0; i <= 8; ++i) times.push_back(0.125 * i);
  MarkFieldEnsemble e{{{1.0, 0.25}, {-1.0, 0.75}}, lambda, {}};
  for (int m = 0; m < 5; ++m) e.paths.push_back(constant_field(times, 2, c));
  for (double p : {0.5, 1.0, 2.0, 3.0}) {
    CHECK(lpq_nu_norm(e, p, 2.0, {0.0, tau}).estimate ==
          doctest::Approx(c * std::sqrt(lambda * tau)).epsilon(1e-14));
  }
  CHECK(lpq_nu_norm(scaled(e, 0.0), 2.0, 2.0, {0.0, 1.0}).estimate == 0.0);
}

TEST_CASE("L^2(L^2(nu)) of a Wiener value field") {
  // g(t) = W(t): E sum_i dt lambda W(t_i)^2 = lambda dt^2 N (N - 1) / 2 on [0, T)
  const double lambda = 2.0;
  const double dt = 0.05;
  const std::size_t N = 20;
  MarkFieldEnsemble e{{{1.0, 1.0}}, lambda, {}};
  for (std::uint64_t m = 0; m < 10000; ++m) {
    const auto noise = sample_noise(MarkSpace::none(), 1, dt * N, dt, 99, m);
    MarkFieldSample s;
    s.times = noise.grid();
    s.norms.resize(static_cast<Eigen::Index>(N + 1), 1);
    double w = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
      s.norms(static_cast<Eigen::Index>(i), 0) = std::abs(w);
      if (i < N) w += noise.increment(i)[0];
    }
    e.paths.push_back(std::move(s));
  }
  const auto est = lpq_nu_norm(e, 2.0, 2.0, {0.0, dt * N});
  const double exact = std::sqrt(lambda * dt * dt * N * (N - 1) / 2.0);
  CAPTURE(est.estimate);
  CAPTURE(exact);
  CHECK(std::abs(est.estimate - exact) <= 3.0 * est.standard_error);
}

TEST_CASE("G^p branches") {
  std::vector<double> times;
  for (int i = 0; i <= 10; ++i) times.push_back(0.1 * i);
  MarkFieldEnsemble g{{{1.0, 0.4}, {2.0, 0.6}}, 2.0, {}};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int m = 0; m < 20; ++m) {
    MarkFieldSample s = constant_field(times, 2, 0.0);
    for (Eigen::Index i = 0; i < s.norms.rows(); ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) s.norms(i, j) = u(rng);
    }
    g.paths.push_back(std::move(s));
  }
  const Window w{0.0, 1.0};

  for (double p : {0.5, 1.0, 2.0, 3.0}) {
    CHECK(gp_norm(scaled(g, 0.0), std::nullopt, p, w).estimate == 0.0);
  }
  CHECK(gp_norm(g, std::nullopt, 0.5, w).estimate == lpq_nu_norm(g, 0.5, 2.0, w).estimate);

  const double two = gp_norm(g, std::nullopt, 2.0, w).estimate;
  CHECK(std::abs(two - 2.0 * lpq_nu_norm(g, 2.0, 2.0, w).estimate) <= 1e-14 * two);

  const auto half = scaled(g, 0.5);
  const auto mid = gp_norm(g, std::make_pair(half, half), 1.5, w);
  CHECK(mid.upper_bound);
  const double expected =
      0.5 * lpq_nu_norm(g, 1.5, 2.0, w).estimate + 0.5 * lpq_nu_norm(g, 1.5, 1.5, w).estimate;
  CHECK(mid.estimate == doctest::Approx(expected).epsilon(1e-14));
  CHECK_THROWS_AS(gp_norm(g, std::nullopt, 1.5, w), std::invalid_argument);
}

TEST_CASE("kappa audit on constant fields") {
  const double c = 0.8;
  const double lambda = 2.0;
  std::vector<double> times;
  for (int i = 0; i <= 64; ++i) times.push_back(i / 64.0);
  const std::vector<MarkNode> nodes{{1.0, 1.0}};
  const auto g = constant_field(times, 1, c);
  const std::vector<double> deltas{0.5, 0.25, 0.125, 0.0625};

  for (double p : {0.5, 2.0, 4.0}) {
    const auto audit = kappa_audit(g, g, nodes, lambda, deltas, p);
    REQUIRE(audit.rows.size() == deltas.size());
    CHECK(audit.monotone);
    for (std::size_t k = 0; k < deltas.size(); ++k) {
      const double ld = lambda * deltas[k];
      const double closed = (p > 1.0 ? c * std::pow(ld, 1.0 / p) : 0.0) + c * std::sqrt(ld);
      CHECK(audit.rows[k].delta == deltas[k]);
      CHECK(audit.rows[k].value == doctest::Approx(closed).epsilon(1e-12));
      if (k > 0 && p <= 2.0) {
        CHECK(audit.rows[k - 1].value / audit.rows[k].value >= std::sqrt(2.0) * (1.0 - 1e-12));
      }
    }
  }

  const auto zero = kappa_audit(constant_field(times, 1, 0.0), nodes, lambda, deltas, 2.0);
  for (const auto& row : zero.rows) CHECK(row.value == 0.0);
  CHECK_THROWS_AS(kappa_audit(g, nodes, lambda, deltas, 1.5), std::invalid_argument);

  const auto halves = kappa_audit(g, nodes, lambda, deltas, 2.0);
  const auto half_field = [&] {
    auto h = g;
    h.norms *= 0.5;
    return h;
  }();
  const auto explicit_halves = kappa_audit(half_field, half_field, nodes, lambda, deltas, 2.0);
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    CHECK(halves.rows[k].value == doctest::Approx(explicit_halves.rows[k].value).epsilon(1e-15));
  }
}

TEST_CASE("bootstrap SE shrinks like M^{-1/2}") {
  const auto small = ou_ensemble(1.0, 1000);
  const auto large = ou_ensemble(1.0, 2000);
  const double ratio = sp_norm(small, 2.0, {0.0, 1.0}).standard_error /
                       sp_norm(large, 2.0, {0.0, 1.0}).standard_error;
  CAPTURE(ratio);
  CHECK(ratio >= 1.2);
  CHECK(ratio <= 1.7);
}

TEST_CASE("blowups are reported") {
  const std::vector<double> sups{1.0, INFINITY, 2.0, 3.0};
  const auto kept = sp_norm_from_sups(sups, 2.0);
  CHECK(kept.blowup_fraction == 0.25);
  CHECK(std::isinf(kept.estimate));
  const auto excluded = sp_norm_from_sups(sups, 2.0, true);
  CHECK(excluded.estimate == doctest::Approx(std::sqrt(14.0 / 3.0)));
  CHECK_THROWS(sp_norm(std::vector<PathSample>{}, 2.0, {0.0, 1.0}));
}
