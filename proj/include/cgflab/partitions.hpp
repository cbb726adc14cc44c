#pragma once

#include <cstdint>
#include <vector>

namespace cgflab {

// Partition of the ground set {0, ..., ground_size - 1} into non-empty,
// pairwise disjoint blocks.  Blocks are sorted internally and ordered by
// their smallest element, so equal partitions compare equal.
struct SetPartition {
  std::vector<std::vector<int>> blocks;
  int ground_size = 0;

  int block_count() const { return static_cast<int>(blocks.size()); }
  bool operator==(const SetPartition&) const = default;
};

// All partitions of {0, ..., d - 1} in a fixed deterministic order
// (lexicographic in restricted growth string encoding).  The sequence has
// bell_number(d) elements.  Throws InputError for d < 1 or d > 12.
std::vector<SetPartition> enumerate_partitions(int d);

// Cached variant of enumerate_partitions for internal hot loops; the
// returned reference stays valid for the process lifetime.
const std::vector<SetPartition>& partitions_of(int d);

// Bell number B_k (B_0 = 1).  Throws InputError for k < 0 or k > 20, the
// largest k whose value is guarded against overflow here.
std::uint64_t bell_number(int k);

// Moebius weight (-1)^(b-1) * (b-1)! of a partition with b blocks, the
// coefficient attached to the partition in the moment-to-cumulant sum.
long long mobius_weight(const SetPartition& p);

}  // namespace cgflab
