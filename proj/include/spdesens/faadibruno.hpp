#pragma once

#include "spdesens/coefficients.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spdesens {

/// Bit i set <=> direction index i (0-based) belongs to the subset.
using SubsetMask = std::uint32_t;

inline constexpr int kMaxPartitionOrder = 8;

/// Partition of {0..n-1}: blocks ordered by smallest element, indices sorted
/// within blocks.
struct SetPartition {
  std::vector<std::vector<int>> blocks;

  std::size_t size() const { return blocks.size(); }
  /// "{1,2}{3}" with 1-based indices.
  std::string to_string() const;
  /// Block sizes sorted in decreasing order, e.g. "2|1".
  std::string size_signature() const;
  bool operator==(const SetPartition&) const = default;
};

/// All partitions of {0..n-1} in restricted-growth-string order; Bell(n)
/// entries. Throws std::out_of_range unless 1 <= n <= 8.
const std::vector<SetPartition>& set_partitions(int n);

/// Bell(n) - 1: the number of partitions with at least two blocks.
std::uint64_t term_count(int n);

/// Bell numbers via the Bell triangle.
std::uint64_t bell_number(int n);

/// "{1,3}" for a mask, 1-based.
std::string mask_to_string(SubsetMask mask);

class MissingSensitivityError : public std::invalid_argument {
 public:
  explicit MissingSensitivityError(SubsetMask block);
  SubsetMask block() const { return block_; }

 private:
  SubsetMask block_;
};

/// Sensitivity values u^{(|S|)}(h_S) keyed by subset mask.
class SensitivityTable {
 public:
  explicit SensitivityTable(int n) : values_(std::size_t{1} << n) {}
  void set(SubsetMask mask, StateVector v) { values_.at(mask) = std::move(v); }
  const StateVector* find(SubsetMask mask) const {
    if (mask >= values_.size() || !values_[mask]) return nullptr;
    return &*values_[mask];
  }

 private:
  std::vector<std::optional<StateVector>> values_;
};

using SensitivityLookup = std::function<const StateVector*(SubsetMask)>;
/// (order j, directions) -> D^j F(base)[directions].
using DerivativeFn = std::function<FieldValue(int, std::span<const StateVector>)>;

/// Sum over all partitions of the subset `target` with at least two blocks
/// of D^{#blocks} F(base)(u^{(|B_1|)}(h_{B_1}), ..., u^{(|B_j|)}(h_{B_j})).
/// Returns a rows x cols zero for singleton targets. Throws
/// MissingSensitivityError naming the first block without a sensitivity.
FieldValue assemble_correction(const DerivativeFn& derivative, SubsetMask target,
                               const SensitivityLookup& lookup, Eigen::Index rows,
                               Eigen::Index cols);

/// Correction term for component `which` of the set at order n on the full
/// direction tuple {1..n}.
FieldValue assemble_correction(const CoefficientSet& set, Component which, int n,
                               const StateVector& base, double t, std::optional<double> z,
                               const SensitivityTable& lower);

}  // namespace spdesens
