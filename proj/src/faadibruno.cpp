#include "spdesens/faadibruno.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <functional>
#include <sstream>

namespace spdesens {
namespace {

std::vector<SetPartition> enumerate(int n) {
  std::vector<SetPartition> out;
  std::vector<int> rgs(static_cast<std::size_t>(n), 0);
  std::vector<int> prefix_max(static_cast<std::size_t>(n), 0);
  while (true) {
    SetPartition p;
    p.blocks.resize(static_cast<std::size_t>(prefix_max.back() + 1));
    for (int i = 0; i < n; ++i) p.blocks[static_cast<std::size_t>(rgs[i])].push_back(i);
    out.push_back(std::move(p));
    // Next restricted growth string: bump the last position that can grow.
    int i = n - 1;
    while (i > 0 && rgs[i] > prefix_max[i - 1]) --i;
    if (i == 0) break;
    ++rgs[i];
    prefix_max[i] = std::max(prefix_max[i - 1], rgs[i]);
    for (int k = i + 1; k < n; ++k) {
      rgs[k] = 0;
      prefix_max[k] = prefix_max[i];
    }
  }
  return out;
}

void check_order(int n) {
  if (n < 1 || n > kMaxPartitionOrder) {
    throw std::out_of_range("partition order must lie in [1, 8], got " + std::to_string(n));
  }
}

}  // namespace

std::string SetPartition::to_string() const {
  std::ostringstream os;
  for (const auto& b : blocks) {
    os << '{';
    for (std::size_t i = 0; i < b.size(); ++i) os << (i ? "," : "") << b[i] + 1;
    os << '}';
  }
  return os.str();
}

std::string SetPartition::size_signature() const {
  std::vector<std::size_t> sizes;
  for (const auto& b : blocks) sizes.push_back(b.size());
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  std::ostringstream os;
  for (std::size_t i = 0; i < sizes.size(); ++i) os << (i ? "|" : "") << sizes[i];
  return os.str();
}

const std::vector<SetPartition>& set_partitions(int n) {
  check_order(n);
  static const auto cache = [] {
    std::array<std::vector<SetPartition>, kMaxPartitionOrder + 1> all;
    for (int k = 1; k <= kMaxPartitionOrder; ++k) all[static_cast<std::size_t>(k)] = enumerate(k);
    return all;
  }();
  return cache[static_cast<std::size_t>(n)];
}

std::uint64_t bell_number(int n) {
  if (n < 0) throw std::out_of_range("Bell number of a negative order");
  std::vector<std::uint64_t> row{1};
  for (int i = 0; i < n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (auto v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

std::uint64_t term_count(int n) {
  check_order(n);
  return bell_number(n) - 1;
}

std::string mask_to_string(SubsetMask mask) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int i = 0; i < 32; ++i) {
    if (mask & (SubsetMask{1} << i)) {
      os << (first ? "" : ",") << i + 1;
      first = false;
    }
  }
  os << '}';
  return os.str();
}

MissingSensitivityError::MissingSensitivityError(SubsetMask block)
    : std::invalid_argument("missing sensitivity for block " + mask_to_string(block)),
      block_(block) {}

FieldValue assemble_correction(const DerivativeFn& derivative, SubsetMask target,
                               const SensitivityLookup& lookup, Eigen::Index rows,
                               Eigen::Index cols) {
  const int k = std::popcount(target);
  FieldValue sum = FieldValue::Zero(rows, cols);
  if (k <= 1) return sum;

  std::array<int, 32> element{};
  int pos = 0;
  for (int i = 0; i < 32; ++i) {
    if (target & (SubsetMask{1} << i)) element[static_cast<std::size_t>(pos++)] = i;
  }

  std::vector<StateVector> args;
  for (const auto& partition : set_partitions(k)) {
    if (partition.size() < 2) continue;
    args.clear();
    for (const auto& block : partition.blocks) {
      SubsetMask m = 0;
      for (int idx : block) m |= SubsetMask{1} << element[static_cast<std::size_t>(idx)];
      const StateVector* v = lookup(m);
      if (!v) throw MissingSensitivityError(m);
      args.push_back(*v);
    }
    sum += derivative(static_cast<int>(args.size()), args);
  }
  return sum;
}

FieldValue assemble_correction(const CoefficientSet& set, Component which, int n,
                               const StateVector& base, double t, std::optional<double> z,
                               const SensitivityTable& lower) {
  check_order(n);
  const auto& field = set.component(which);
  auto derivative = [&](int order, std::span<const StateVector> dirs) {
    return eval_derivative(set, which, order, t, z, base, dirs);
  };
  auto lookup = [&](SubsetMask m) { return lower.find(m); };
  const SubsetMask full = (SubsetMask{1} << n) - 1;
  return assemble_correction(derivative, full, lookup, field.rows(), field.cols());
}

}  // namespace spdesens
