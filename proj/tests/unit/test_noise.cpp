#include "spdesens/noise.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <map>

using namespace spdesens;

TEST_CASE("zero intensity gives the uniform grid and no jumps") {
  const auto n = sample_noise(MarkSpace::none(), 2, 1.0, 0.1, 9, 0);
  CHECK(n.jumps().empty());
  REQUIRE(n.grid().size() == 11);
  for (std::size_t i = 0; i < n.grid().size(); ++i) {
    CHECK(n.grid()[i] == doctest::Approx(0.1 * static_cast<double>(i)).epsilon(1e-15));
  }
  CHECK(n.grid().back() == 1.0);
  CHECK(n.increments().cols() == 10);
}

TEST_CASE("realizations are pure functions of (seed, path)") {
  const auto marks = MarkSpace::finite({1.0, -1.0}, {0.5, 0.5}, 3.0);
  const auto a = sample_noise(marks, 3, 2.0, 0.05, 77, 12);
  const auto b = sample_noise(marks, 3, 2.0, 0.05, 77, 12);
  CHECK(a.grid() == b.grid());
  CHECK(a.increments() == b.increments());
  REQUIRE(a.jumps().size() == b.jumps().size());
  for (std::size_t k = 0; k < a.jumps().size(); ++k) {
    CHECK(a.jumps()[k].time == b.jumps()[k].time);
    CHECK(a.jumps()[k].mark == b.jumps()[k].mark);
  }
  CHECK_FALSE(a.same_realization(b));
  CHECK(scale_direction_pairing(a).same_realization(a));
  const auto c = sample_noise(marks, 3, 2.0, 0.05, 77, 13);
  CHECK(c.increments() != a.increments());
  CHECK(path_seed(77, 12) != path_seed(77, 13));
  CHECK(path_seed(77, 12) != path_seed(78, 12));
}

TEST_CASE("jump times are grid points and carry marks") {
  const auto marks = MarkSpace::finite({0.5, 2.0}, {0.4, 0.6}, 5.0);
  const auto n = sample_noise(marks, 1, 1.0, 0.1, 3, 4);
  std::size_t seen = 0;
  for (std::size_t i = 0; i < n.grid().size(); ++i) {
    if (i > 0) CHECK(n.grid()[i] > n.grid()[i - 1]);
    if (n.jump_at(i) >= 0) {
      const auto& e = n.jumps()[static_cast<std::size_t>(n.jump_at(i))];
      CHECK(e.time == n.grid()[i]);
      CHECK((e.mark == 0.5 || e.mark == 2.0));
      ++seen;
    }
  }
  CHECK(seen == n.jumps().size());
}

TEST_CASE("event counts follow the Poisson law") {
  const double lambda = 2.0;
  const std::size_t M = 100000;
  const auto marks = MarkSpace::finite({1.0}, {1.0}, lambda);
  std::map<std::size_t, std::size_t> hist;
  double sum = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const std::size_t k = sample_noise(marks, 0, 1.0, 1.0, 2024, m).jumps().size();
    ++hist[std::min<std::size_t>(k, 7)];
    sum += static_cast<double>(k);
  }
  const double mean = sum / static_cast<double>(M);
  CHECK(std::abs(mean - lambda) <= 3.0 * std::sqrt(lambda / static_cast<double>(M)));

  // chi-square against Poisson(2) on cells 0..6 and 7+; 7 degrees of freedom
  double chi2 = 0.0;
  double tail = 1.0;
  double pk = std::exp(-lambda);
  for (std::size_t k = 0; k <= 7; ++k) {
    const double p = k < 7 ? pk : tail;
    const double expected = p * static_cast<double>(M);
    const double observed = static_cast<double>(hist[k]);
    chi2 += (observed - expected) * (observed - expected) / expected;
    tail -= pk;
    pk *= lambda / static_cast<double>(k + 1);
  }
  CHECK(chi2 < 24.32);  // 0.999 quantile of chi-square(7)
}

TEST_CASE("Wiener increment moments") {
  const std::size_t M = 100000;
  const double dt = 0.25;
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const auto n = sample_noise(MarkSpace::none(), 1, dt, dt, 31, m);
    const double x = n.increments()(0, 0);
    s1 += x;
    s2 += x * x;
  }
  const double Md = static_cast<double>(M);
  const double mean = s1 / Md;
  const double var = s2 / Md - mean * mean;
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(dt / Md));
  CHECK(std::abs(var / dt - 1.0) <= 5.0 / std::sqrt(Md));
}

TEST_CASE("finite marks are drawn with their weights") {
  const auto marks = MarkSpace::finite({-1.0, 0.0, 3.0}, {0.2, 0.3, 0.5}, 1.0);
  std::mt19937_64 rng(5);
  std::map<double, int> count;
  const int M = 200000;
  for (int k = 0; k < M; ++k) ++count[marks.sample(rng)];
  CHECK(std::abs(count[-1.0] / double(M) - 0.2) < 4 * std::sqrt(0.2 * 0.8 / M));
  CHECK(std::abs(count[3.0] / double(M) - 0.5) < 4 * std::sqrt(0.25 / M));
  CHECK_THROWS(MarkSpace::finite({1.0, 2.0}, {0.5, 0.6}, 1.0));
}

TEST_CASE("interval marks: inverse CDF and quadrature nodes") {
  // density 2z on [0,1]: CDF z^2, quantile sqrt(u), mean 2/3
  const auto marks = MarkSpace::interval({0.0, 1.0}, 1.5);
  CHECK(marks.kind() == MarkSpace::Kind::Interval);
  for (double u : {0.0, 0.1, 0.25, 0.5, 0.81, 0.99}) {
    CHECK(marks.quantile(u) == doctest::Approx(std::sqrt(u)).epsilon(1e-12));
  }
  double mass = 0.0;
  double first = 0.0;
  for (const auto& node : marks.nodes()) {
    mass += node.weight;
    first += node.weight * node.mark;
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(first == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  const auto flat = MarkSpace::interval({1.0, 1.0, 1.0}, 1.0);
  CHECK(flat.quantile(0.3) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("coarsen sums increments and keeps jumps; truncate restricts") {
  const auto marks = MarkSpace::finite({1.0}, {1.0}, 4.0);
  const auto fine = sample_noise(marks, 2, 1.0, 0.01, 8, 1);
  const auto coarse = coarsen(fine, 4);
  CHECK(coarse.jumps().size() == fine.jumps().size());
  CHECK(coarse.base_dt() == doctest::Approx(0.04));
  const Eigen::VectorXd total_fine = fine.increments().rowwise().sum();
  const Eigen::VectorXd total_coarse = coarse.increments().rowwise().sum();
  CHECK((total_fine - total_coarse).norm() <= 1e-12);

  const auto head = truncate(fine, 0.3);
  CHECK(head.horizon() <= 0.3 + 1e-12);
  for (std::size_t i = 0; i < head.steps(); ++i) {
    CHECK(head.increment(i) == fine.increment(i));
  }
}

TEST_CASE("desk-scale guard and argument checks") {
  const auto marks = MarkSpace::finite({1.0}, {1.0}, 1e8);
  CHECK_THROWS_AS(sample_noise(marks, 0, 1.0, 0.1, 1, 0), std::domain_error);
  CHECK_THROWS(sample_noise(MarkSpace::none(), 1, 1.0, 0.0, 1, 0));
  CHECK_THROWS(sample_noise(MarkSpace::none(), 1, -1.0, 0.1, 1, 0));
}
