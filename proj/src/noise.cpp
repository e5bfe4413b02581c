#include "spdesens/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace spdesens {
namespace {

constexpr double kMaxExpectedEvents = 1e7;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_intensity(double intensity) {
  if (!std::isfinite(intensity) || intensity < 0.0) {
    throw std::invalid_argument("jump intensity must be finite and nonnegative");
  }
}

}  // namespace

MarkSpace MarkSpace::finite(std::vector<double> marks, std::vector<double> weights,
                            double intensity) {
  check_intensity(intensity);
  if (marks.empty() || marks.size() != weights.size()) {
    throw std::invalid_argument("finite mark space needs matching nonempty marks and weights");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("mark weights must be finite and nonnegative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("mark weights must sum to 1, got " + std::to_string(total));
  }
  MarkSpace ms;
  ms.kind_ = Kind::Finite;
  ms.intensity_ = intensity;
  ms.marks_ = std::move(marks);
  ms.cumulative_.resize(weights.size());
  std::partial_sum(weights.begin(), weights.end(), ms.cumulative_.begin());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    ms.nodes_.push_back({ms.marks_[i], weights[i]});
  }
  return ms;
}

MarkSpace MarkSpace::interval(std::vector<double> density_table, double intensity) {
  check_intensity(intensity);
  if (density_table.size() < 2) {
    throw std::invalid_argument("mark density table needs at least two nodes");
  }
  for (double f : density_table) {
    if (!(f >= 0.0) || !std::isfinite(f)) {
      throw std::invalid_argument("mark density values must be finite and nonnegative");
    }
  }
  const std::size_t cells = density_table.size() - 1;
  const double h = 1.0 / static_cast<double>(cells);
  double mass = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    mass += 0.5 * h * (density_table[i] + density_table[i + 1]);
  }
  if (!(mass > 0.0)) {
    throw std::invalid_argument("mark density has zero mass");
  }
  MarkSpace ms;
  ms.kind_ = Kind::Interval;
  ms.intensity_ = intensity;
  ms.density_ = std::move(density_table);
  for (double& f : ms.density_) f /= mass;
  ms.cumulative_.assign(ms.density_.size(), 0.0);
  for (std::size_t i = 0; i < cells; ++i) {
    ms.cumulative_[i + 1] = ms.cumulative_[i] + 0.5 * h * (ms.density_[i] + ms.density_[i + 1]);
  }
  const double a = std::sqrt(3.0 / 5.0);
  const double gl_x[3] = {-a, 0.0, a};
  const double gl_w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  for (std::size_t i = 0; i < cells; ++i) {
    const double x0 = static_cast<double>(i) * h;
    for (int q = 0; q < 3; ++q) {
      const double s = 0.5 * (1.0 + gl_x[q]);
      const double z = x0 + s * h;
      const double f = ms.density_[i] + s * (ms.density_[i + 1] - ms.density_[i]);
      ms.nodes_.push_back({z, 0.5 * h * gl_w[q] * f});
    }
  }
  return ms;
}

MarkSpace MarkSpace::none() { return finite({0.0}, {1.0}, 0.0); }

double MarkSpace::quantile(double u) const {
  if (kind_ == Kind::Finite) {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                           marks_.size() - 1);
    return marks_[idx];
  }
  const std::size_t cells = density_.size() - 1;
  const double h = 1.0 / static_cast<double>(cells);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t i = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  i = std::min(i, cells - 1);
  const double rest = std::max(0.0, u - cumulative_[i]);
  // Solve f_i s + (f_{i+1} - f_i) s^2 / (2h) = rest for s in [0, h].
  const double a = (density_[i + 1] - density_[i]) / (2.0 * h);
  const double b = density_[i];
  const double disc = std::max(0.0, b * b + 4.0 * a * rest);
  const double denom = b + std::sqrt(disc);
  const double s = denom > 0.0 ? 2.0 * rest / denom : 0.0;
  return std::clamp(static_cast<double>(i) * h + std::min(s, h), 0.0, 1.0);
}

double MarkSpace::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return quantile(unif(rng));
}

std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t path_index) {
  return splitmix64(master_seed ^ splitmix64(path_index ^ 0xd1b54a32d192ed03ULL));
}

NoiseRealization sample_noise(const MarkSpace& marks, std::size_t wiener_dim, double horizon,
                              double base_dt, std::uint64_t master_seed,
                              std::uint64_t path_index) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("time horizon T must be positive");
  }
  if (!(base_dt > 0.0) || !std::isfinite(base_dt)) {
    throw std::invalid_argument("time step dt must be positive");
  }
  if (marks.intensity() * horizon > kMaxExpectedEvents) {
    throw std::domain_error("intensity too large for desk scale: lambda*T = " +
                            std::to_string(marks.intensity() * horizon));
  }

  std::mt19937_64 rng(path_seed(master_seed, path_index));

  std::vector<JumpEvent> jumps;
  if (marks.intensity() > 0.0) {
    std::exponential_distribution<double> wait(marks.intensity());
    double t = wait(rng);
    while (t <= horizon) {
      jumps.push_back({t, 0.0});
      t += wait(rng);
    }
    for (auto& ev : jumps) ev.mark = marks.sample(rng);
  }

  const auto n_base = static_cast<std::size_t>(std::ceil(horizon / base_dt - 1e-9));
  std::vector<double> base(n_base + 1);
  for (std::size_t k = 0; k < n_base; ++k) base[k] = static_cast<double>(k) * base_dt;
  base[n_base] = horizon;

  auto data = std::make_shared<NoiseRealization::Data>();
  data->grid.reserve(base.size() + jumps.size());
  std::size_t b = 0;
  std::size_t j = 0;
  while (b < base.size() || j < jumps.size()) {
    if (j < jumps.size() && (b == base.size() || jumps[j].time < base[b])) {
      data->grid.push_back(jumps[j].time);
      data->jump_at.push_back(static_cast<int>(j));
      data->base_index.push_back(-1);
      ++j;
    } else if (j < jumps.size() && jumps[j].time == base[b]) {
      data->grid.push_back(base[b]);
      data->jump_at.push_back(static_cast<int>(j));
      data->base_index.push_back(static_cast<int>(b));
      ++j;
      ++b;
    } else {
      data->grid.push_back(base[b]);
      data->jump_at.push_back(-1);
      data->base_index.push_back(static_cast<int>(b));
      ++b;
    }
  }

  const std::size_t steps = data->grid.size() - 1;
  data->increments.resize(static_cast<Eigen::Index>(wiener_dim), static_cast<Eigen::Index>(steps));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < steps; ++i) {
    const double sd = std::sqrt(data->grid[i + 1] - data->grid[i]);
    for (std::size_t r = 0; r < wiener_dim; ++r) {
      data->increments(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = sd * normal(rng);
    }
  }
  data->jumps = std::move(jumps);
  data->marks = marks;
  data->base_dt = base_dt;
  data->master_seed = master_seed;
  data->path_index = path_index;
  return NoiseRealization(std::move(data));
}

NoiseRealization scale_direction_pairing(const NoiseRealization& noise) { return noise; }

NoiseRealization coarsen(const NoiseRealization& noise, std::size_t factor) {
  if (factor == 0) throw std::invalid_argument("coarsening factor must be positive");
  if (factor == 1) return noise;
  const auto& grid = noise.grid();
  const auto& base = noise.base_index();
  const std::size_t last = grid.size() - 1;

  auto data = std::make_shared<NoiseRealization::Data>();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i <= last; ++i) {
    const bool on_coarse = base[i] >= 0 && static_cast<std::size_t>(base[i]) % factor == 0;
    if (i == 0 || i == last || on_coarse || noise.jump_at(i) >= 0) keep.push_back(i);
  }
  data->increments = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(noise.wiener_dim()),
                                           static_cast<Eigen::Index>(keep.size() - 1));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const std::size_t i = keep[k];
    data->grid.push_back(grid[i]);
    data->jump_at.push_back(noise.jump_at(i));
    data->base_index.push_back(base[i] >= 0 && static_cast<std::size_t>(base[i]) % factor == 0
                                   ? base[i] / static_cast<int>(factor)
                                   : -1);
    if (k + 1 < keep.size()) {
      for (std::size_t s = i; s < keep[k + 1]; ++s) {
        data->increments.col(static_cast<Eigen::Index>(k)) += noise.increment(s);
      }
    }
  }
  data->jumps = noise.jumps();
  data->marks = noise.marks();
  data->base_dt = noise.base_dt() * static_cast<double>(factor);
  data->master_seed = noise.master_seed();
  data->path_index = noise.path_index();
  return NoiseRealization(std::move(data));
}

NoiseRealization truncate(const NoiseRealization& noise, double horizon) {
  const auto& grid = noise.grid();
  std::size_t last = 1;
  while (last + 1 < grid.size() && grid[last + 1] <= horizon * (1.0 + 1e-12)) ++last;
  auto data = std::make_shared<NoiseRealization::Data>();
  data->grid.assign(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(last + 1));
  data->increments = noise.increments().leftCols(static_cast<Eigen::Index>(last));
  data->base_index.assign(noise.base_index().begin(),
                          noise.base_index().begin() + static_cast<std::ptrdiff_t>(last + 1));
  std::size_t kept_jumps = 0;
  for (std::size_t i = 0; i <= last; ++i) {
    const int j = noise.jump_at(i);
    data->jump_at.push_back(j);
    if (j >= 0) kept_jumps = static_cast<std::size_t>(j) + 1;
  }
  data->jumps.assign(noise.jumps().begin(),
                     noise.jumps().begin() + static_cast<std::ptrdiff_t>(kept_jumps));
  data->marks = noise.marks();
  data->base_dt = noise.base_dt();
  data->master_seed = noise.master_seed();
  data->path_index = noise.path_index();
  return NoiseRealization(std::move(data));
}

}  // namespace spdesens
