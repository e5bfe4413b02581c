#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

namespace spdesens {

/// One node of the fixed quadrature used for integrals against the mark law.
struct MarkNode {
  double mark;
  double weight;
};

/// Mark space Z with probability law m and jump intensity lambda; the
/// compensator is nu(dt, dz) = lambda dt (x) m(dz).
class MarkSpace {
 public:
  enum class Kind { Finite, Interval };

  /// Finite marks z_i with weights m_i summing to one (within 1e-12).
  static MarkSpace finite(std::vector<double> marks, std::vector<double> weights,
                          double intensity);
  /// Marks on [0,1] with a piecewise-linear density tabulated at equally
  /// spaced nodes (normalized here). Sampling uses the exact inverse CDF;
  /// compensator integrals use three-point Gauss-Legendre per table cell.
  static MarkSpace interval(std::vector<double> density_table, double intensity);
  /// No jumps at all.
  static MarkSpace none();

  Kind kind() const { return kind_; }
  double intensity() const { return intensity_; }
  const std::vector<MarkNode>& nodes() const { return nodes_; }

  /// Draws one mark from m.
  double sample(std::mt19937_64& rng) const;
  /// Inverse CDF of m at u in [0,1).
  double quantile(double u) const;

 private:
  MarkSpace() = default;

  Kind kind_ = Kind::Finite;
  double intensity_ = 0.0;
  std::vector<double> marks_;       // finite: atoms
  std::vector<double> cumulative_;  // finite: cumulative weights; interval: CDF at table nodes
  std::vector<double> density_;     // interval: normalized density at table nodes
  std::vector<MarkNode> nodes_;
};

struct JumpEvent {
  double time;
  double mark;
};

/// One path of driving noise on a jump-adapted grid. Immutable; copies share
/// the underlying storage.
class NoiseRealization {
 public:
  struct Data {
    std::vector<double> grid;           // 0 = t_0 < ... < t_N = T
    Eigen::MatrixXd increments;         // d_W x N, column i is W(t_{i+1}) - W(t_i)
    std::vector<JumpEvent> jumps;       // sorted by time
    std::vector<int> jump_at;           // per grid point: index into jumps or -1
    std::vector<int> base_index;        // per grid point: index on the uniform grid or -1
    MarkSpace marks = MarkSpace::none();
    double base_dt = 0.0;
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
  };

  explicit NoiseRealization(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  const std::vector<double>& grid() const { return data_->grid; }
  std::size_t steps() const { return data_->grid.size() - 1; }
  double horizon() const { return data_->grid.back(); }
  std::size_t wiener_dim() const { return static_cast<std::size_t>(data_->increments.rows()); }
  const Eigen::MatrixXd& increments() const { return data_->increments; }
  auto increment(std::size_t i) const { return data_->increments.col(static_cast<Eigen::Index>(i)); }
  const std::vector<JumpEvent>& jumps() const { return data_->jumps; }
  /// Index into jumps() if grid point i is a jump time, else -1.
  int jump_at(std::size_t i) const { return data_->jump_at[i]; }
  const std::vector<int>& base_index() const { return data_->base_index; }
  const MarkSpace& marks() const { return data_->marks; }
  double base_dt() const { return data_->base_dt; }
  std::uint64_t master_seed() const { return data_->master_seed; }
  std::uint64_t path_index() const { return data_->path_index; }

  /// True iff both handles refer to the same draw.
  bool same_realization(const NoiseRealization& other) const { return data_ == other.data_; }

 private:
  std::shared_ptr<const Data> data_;
};

/// Counter-based per-path seed: a pure function of (master_seed, path_index).
std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t path_index);

/// Samples jump times by exponential interarrivals, marks i.i.d. from m, and
/// Gaussian increments on the uniform grid of step base_dt merged with the
/// jump times. Throws std::invalid_argument on bad arguments and
/// std::domain_error when lambda*T exceeds 1e7 expected events.
NoiseRealization sample_noise(const MarkSpace& marks, std::size_t wiener_dim, double horizon,
                              double base_dt, std::uint64_t master_seed,
                              std::uint64_t path_index);

/// Returns the same realization for a run with a perturbed initial datum.
/// Difference quotients must only ever combine runs whose noise handles
/// satisfy same_realization().
NoiseRealization scale_direction_pairing(const NoiseRealization& noise);

/// Realization on the uniform grid with step factor*base_dt, keeping every
/// jump time and summing the Wiener increments. Used for pathwise
/// self-convergence checks with common noise.
NoiseRealization coarsen(const NoiseRealization& noise, std::size_t factor);

/// Restriction to the grid points t_i <= horizon (at least one step is kept).
NoiseRealization truncate(const NoiseRealization& noise, double horizon);

}  // namespace spdesens
