#include "cgflab/partitions.hpp"

#include <array>
#include <mutex>
#include <string>

#include "cgflab/errors.hpp"

namespace cgflab {

namespace {
constexpr int kMaxGround = 12;

// Decode a restricted growth string into blocks.  Block labels appear in
// first-occurrence order, which orders blocks by smallest element.
SetPartition decode(const std::vector<int>& rgs) {
  SetPartition p;
  p.ground_size = static_cast<int>(rgs.size());
  int max_label = -1;
  for (int i = 0; i < p.ground_size; ++i) {
    if (rgs[i] > max_label) {
      max_label = rgs[i];
      p.blocks.emplace_back();
    }
    p.blocks[rgs[i]].push_back(i);
  }
  return p;
}
}  // namespace

std::vector<SetPartition> enumerate_partitions(int d) {
  if (d < 1 || d > kMaxGround)
    throw InputError("enumerate_partitions: d must be in [1, " +
                     std::to_string(kMaxGround) + "], got " + std::to_string(d));
  std::vector<SetPartition> out;
  out.reserve(bell_number(d));
  std::vector<int> rgs(d, 0);
  for (;;) {
    out.push_back(decode(rgs));
    // Advance to the next restricted growth string: rightmost position that
    // can still be incremented (value <= max of prefix), reset the suffix.
    int i = d - 1;
    for (; i > 0; --i) {
      int prefix_max = 0;
      for (int j = 0; j < i; ++j) prefix_max = std::max(prefix_max, rgs[j]);
      if (rgs[i] <= prefix_max) break;
    }
    if (i == 0) return out;
    ++rgs[i];
    for (int j = i + 1; j < d; ++j) rgs[j] = 0;
  }
}

const std::vector<SetPartition>& partitions_of(int d) {
  if (d < 1 || d > kMaxGround)
    throw InputError("partitions_of: d must be in [1, " +
                     std::to_string(kMaxGround) + "], got " + std::to_string(d));
  static std::array<std::vector<SetPartition>, kMaxGround + 1> cache;
  static std::array<std::once_flag, kMaxGround + 1> flags;
  std::call_once(flags[d], [d] { cache[d] = enumerate_partitions(d); });
  return cache[d];
}

std::uint64_t bell_number(int k) {
  if (k < 0 || k > 20)
    throw InputError("bell_number: k must be in [0, 20], got " +
                     std::to_string(k));
  // Bell triangle; row r starts with the last element of row r - 1.
  std::vector<std::uint64_t> row{1};
  std::uint64_t bell = 1;  // B_0
  for (int r = 1; r <= k; ++r) {
    std::vector<std::uint64_t> next(r + 1);
    next[0] = row.back();
    for (int i = 1; i <= r; ++i) next[i] = next[i - 1] + row[i - 1];
    bell = next[0];
    row = std::move(next);
  }
  return bell;
}

long long mobius_weight(const SetPartition& p) {
  const int b = p.block_count();
  if (b < 1)
    throw InputError("mobius_weight: partition has no blocks");
  long long w = (b % 2 == 1) ? 1 : -1;
  for (int i = 1; i <= b - 1; ++i) w *= i;
  return w;
}

}  // namespace cgflab
