#include "cgflab/cumulants.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cgflab/errors.hpp"
#include "cgflab/partitions.hpp"

namespace cgflab {

namespace {

void check_columns(const Eigen::MatrixXd& data, const std::vector<int>& cols) {
  if (data.rows() < 1) throw InputError("empty data matrix");
  for (int c : cols)
    if (c < 0 || c >= data.cols())
      throw InputError("column index " + std::to_string(c) +
                       " out of range for " + std::to_string(data.cols()) +
                       " columns");
}

// Sorted multi-indices over `columns` (itself sorted) of exactly size k.
void multisets_of_size(const std::vector<int>& columns, int k,
                       std::vector<int>& current, int from,
                       std::vector<MultiIndex>& out) {
  if (static_cast<int>(current.size()) == k) {
    out.push_back(MultiIndex(current));
    return;
  }
  for (int i = from; i < static_cast<int>(columns.size()); ++i) {
    current.push_back(columns[i]);
    multisets_of_size(columns, k, current, i, out);
    current.pop_back();
  }
}

std::vector<MultiIndex> all_multisets(const std::vector<int>& columns,
                                      int max_order) {
  std::vector<MultiIndex> out;
  std::vector<int> current;
  for (int k = 1; k <= max_order; ++k)
    multisets_of_size(columns, k, current, 0, out);
  return out;
}

double mean_of_products(const Eigen::MatrixXd& data, const MultiIndex& idx) {
  KahanSum acc;
  const Eigen::Index n = data.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (int j : idx.indices()) p *= data(i, j);
    acc.add(p);
  }
  return acc.value() / static_cast<double>(n);
}

MultiIndex block_index(const MultiIndex& idx, const std::vector<int>& block) {
  std::vector<int> v;
  v.reserve(block.size());
  for (int pos : block) v.push_back(idx.indices()[pos]);
  return MultiIndex(std::move(v));
}

// Moments for exactly the sub-multi-indices of idx that the partition sum
// touches (every block of every partition of the index positions).
MomentSet moments_for_blocks(const Eigen::MatrixXd& data,
                             const MultiIndex& idx) {
  std::set<MultiIndex> needed;
  for (const SetPartition& p : partitions_of(idx.order()))
    for (const auto& block : p.blocks) needed.insert(block_index(idx, block));
  MomentSet moments(static_cast<int>(data.cols()));
  for (const MultiIndex& m : needed) moments.set(m, mean_of_products(data, m));
  return moments;
}

// Cumulants of order >= 2 are shift-invariant, but the raw-moment partition
// sum is not: with means far from zero its leading terms dwarf the result
// and roundoff is amplified by the cancellation.  Centering the involved
// columns keeps the intermediates on the scale of the answer.
Eigen::MatrixXd centered_columns(const Eigen::MatrixXd& data,
                                 const std::vector<int>& cols) {
  Eigen::MatrixXd out = data;
  const double n = static_cast<double>(data.rows());
  for (int c : cols) {
    KahanSum acc;
    for (Eigen::Index i = 0; i < data.rows(); ++i) acc.add(data(i, c));
    out.col(c).array() -= acc.value() / n;
  }
  return out;
}

}  // namespace

MultiIndex::MultiIndex(std::vector<int> indices) : ix_(std::move(indices)) {
  if (ix_.empty()) throw InputError("MultiIndex: empty index");
  if (static_cast<int>(ix_.size()) > kMaxCumulantOrder)
    throw InputError("MultiIndex: order " + std::to_string(ix_.size()) +
                     " exceeds cap " + std::to_string(kMaxCumulantOrder));
  for (int j : ix_)
    if (j < 0) throw InputError("MultiIndex: negative index");
  std::sort(ix_.begin(), ix_.end());
}

MultiIndex MultiIndex::repeated(int index, int count) {
  return MultiIndex(std::vector<int>(count, index));
}

long long MultiIndex::distinct_permutations() const {
  long long num = 1;
  for (int i = 2; i <= order(); ++i) num *= i;
  int run = 1;
  for (int i = 1; i < order(); ++i) {
    if (ix_[i] == ix_[i - 1]) {
      ++run;
      num /= run;
    } else {
      run = 1;
    }
  }
  return num;
}

std::string MultiIndex::to_string() const {
  std::string s = "(";
  for (int i = 0; i < order(); ++i) {
    if (i) s += ",";
    s += std::to_string(ix_[i]);
  }
  return s + ")";
}

MomentSet::MomentSet(int dimension) : dimension_(dimension) {
  if (dimension < 1) throw InputError("MomentSet: dimension must be positive");
}

void MomentSet::set(const MultiIndex& idx, double value) {
  if (idx.max_index() >= dimension_)
    throw InputError("MomentSet: index " + idx.to_string() +
                     " out of range for dimension " +
                     std::to_string(dimension_));
  values_[idx] = value;
}

bool MomentSet::contains(const MultiIndex& idx) const {
  return values_.count(idx) > 0;
}

double MomentSet::at(const MultiIndex& idx) const {
  auto it = values_.find(idx);
  if (it == values_.end())
    throw InputError("MomentSet: moment " + idx.to_string() + " is missing");
  return it->second;
}

MomentSet MomentSet::from_data(const Eigen::MatrixXd& data,
                               const std::vector<int>& columns,
                               int max_order) {
  if (max_order < 1 || max_order > kMaxCumulantOrder)
    throw InputError("MomentSet::from_data: max_order out of range");
  std::vector<int> cols = columns;
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  if (cols.empty()) throw InputError("MomentSet::from_data: no columns");
  check_columns(data, cols);
  MomentSet moments(static_cast<int>(data.cols()));
  for (const MultiIndex& idx : all_multisets(cols, max_order))
    moments.set(idx, mean_of_products(data, idx));
  return moments;
}

MomentSet MomentSet::from_data(const Eigen::MatrixXd& data, int max_order) {
  std::vector<int> cols(data.cols());
  for (int j = 0; j < static_cast<int>(cols.size()); ++j) cols[j] = j;
  return from_data(data, cols, max_order);
}

CumulantSet::CumulantSet(int dimension) : dimension_(dimension) {
  if (dimension < 1)
    throw InputError("CumulantSet: dimension must be positive");
}

void CumulantSet::set(const MultiIndex& idx, double value) {
  if (idx.max_index() >= dimension_)
    throw InputError("CumulantSet: index " + idx.to_string() +
                     " out of range for dimension " +
                     std::to_string(dimension_));
  values_[idx] = value;
}

bool CumulantSet::contains(const MultiIndex& idx) const {
  return values_.count(idx) > 0;
}

double CumulantSet::at(const MultiIndex& idx) const {
  auto it = values_.find(idx);
  if (it == values_.end())
    throw InputError("CumulantSet: cumulant " + idx.to_string() +
                     " is missing");
  return it->second;
}

CumulantTensor::CumulantTensor(int dimension, int order)
    : dimension_(dimension), order_(order) {
  if (dimension < 1)
    throw InputError("CumulantTensor: dimension must be positive");
  if (order < 1 || order > kMaxCumulantOrder)
    throw InputError("CumulantTensor: order out of range");
}

void CumulantTensor::set(const MultiIndex& idx, double value) {
  if (idx.order() != order_)
    throw InputError("CumulantTensor: index " + idx.to_string() +
                     " has order " + std::to_string(idx.order()) +
                     ", tensor has order " + std::to_string(order_));
  if (idx.max_index() >= dimension_)
    throw InputError("CumulantTensor: index " + idx.to_string() +
                     " out of range for dimension " +
                     std::to_string(dimension_));
  values_[idx] = value;
}

double CumulantTensor::at(const MultiIndex& idx) const {
  auto it = values_.find(idx);
  return it == values_.end() ? 0.0 : it->second;
}

CumulantTensor CumulantTensor::from_data(const Eigen::MatrixXd& data,
                                         int order) {
  CumulantTensor tensor(static_cast<int>(data.cols()), order);
  const MomentSet moments = MomentSet::from_data(data, order);
  std::vector<int> cols(data.cols());
  for (int j = 0; j < static_cast<int>(cols.size()); ++j) cols[j] = j;
  std::vector<MultiIndex> idxs;
  std::vector<int> current;
  multisets_of_size(cols, order, current, 0, idxs);
  for (const MultiIndex& idx : idxs)
    tensor.set(idx, cumulant_from_moments(moments, idx));
  return tensor;
}

double cumulant_from_moments(const MomentSet& moments, const MultiIndex& idx) {
  KahanSum acc;
  for (const SetPartition& p : partitions_of(idx.order())) {
    double term = static_cast<double>(mobius_weight(p));
    for (const auto& block : p.blocks)
      term *= moments.at(block_index(idx, block));
    acc.add(term);
  }
  return acc.value();
}

double moment_from_cumulants(const CumulantSet& cumulants,
                             const MultiIndex& idx) {
  KahanSum acc;
  for (const SetPartition& p : partitions_of(idx.order())) {
    double term = 1.0;
    for (const auto& block : p.blocks)
      term *= cumulants.at(block_index(idx, block));
    acc.add(term);
  }
  return acc.value();
}

double sample_joint_cumulant(const Eigen::MatrixXd& data,
                             const MultiIndex& idx) {
  std::vector<int> cols(idx.indices());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  check_columns(data, cols);
  // Order 1 is the plain mean; higher orders are shift-invariant and are
  // evaluated on centered columns for numerical conditioning.
  if (idx.order() == 1) return mean_of_products(data, idx);
  const Eigen::MatrixXd centered = centered_columns(data, cols);
  return cumulant_from_moments(moments_for_blocks(centered, idx), idx);
}

double cumulant_of_sum(const Eigen::MatrixXd& data,
                       const std::vector<int>& subset, int r) {
  if (r < 1 || r > kMaxCumulantOrder)
    throw InputError("cumulant_of_sum: order must be in [1, " +
                     std::to_string(kMaxCumulantOrder) + "]");
  std::vector<int> cols = subset;
  std::sort(cols.begin(), cols.end());
  if (cols.empty()) throw InputError("cumulant_of_sum: empty subset");
  if (std::adjacent_find(cols.begin(), cols.end()) != cols.end())
    throw InputError("cumulant_of_sum: subset has duplicate columns");
  check_columns(data, cols);

  if (r == 1) {
    KahanSum acc;
    for (int c : cols)
      for (Eigen::Index i = 0; i < data.rows(); ++i) acc.add(data(i, c));
    return acc.value() / static_cast<double>(data.rows());
  }

  // As above: orders >= 2 are shift-invariant, so the multiset expansion
  // runs on centered columns to avoid raw-moment cancellation.
  const MomentSet moments =
      MomentSet::from_data(centered_columns(data, cols), cols, r);
  std::vector<MultiIndex> idxs;
  std::vector<int> current;
  multisets_of_size(cols, r, current, 0, idxs);
  KahanSum acc;
  for (const MultiIndex& idx : idxs) {
    const double w = static_cast<double>(idx.distinct_permutations());
    acc.add(w * cumulant_from_moments(moments, idx));
  }
  return acc.value();
}

std::vector<double> sample_cumulants_of_series(const Eigen::VectorXd& x,
                                               int max_order) {
  if (max_order < 1 || max_order > kMaxCumulantOrder)
    throw InputError("sample_cumulants_of_series: order out of range");
  if (x.size() < 1) throw InputError("sample_cumulants_of_series: empty data");
  const double n = static_cast<double>(x.size());
  KahanSum mean_acc;
  for (Eigen::Index i = 0; i < x.size(); ++i) mean_acc.add(x[i]);
  const double mean = mean_acc.value() / n;

  std::vector<double> out(max_order);
  out[0] = mean;
  if (max_order == 1) return out;

  const int top = std::min(max_order, 6);
  std::vector<KahanSum> acc(top + 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double c = x[i] - mean;
    double p = c;
    for (int k = 2; k <= top; ++k) {
      p *= c;
      acc[k].add(p);
    }
  }
  std::vector<double> m(top + 1, 0.0);
  for (int k = 2; k <= top; ++k) m[k] = acc[k].value() / n;

  if (max_order >= 2) out[1] = m[2];
  if (max_order >= 3) out[2] = m[3];
  if (max_order >= 4) out[3] = m[4] - 3.0 * m[2] * m[2];
  if (max_order >= 5) out[4] = m[5] - 10.0 * m[3] * m[2];
  if (max_order >= 6)
    out[5] = m[6] - 15.0 * m[4] * m[2] - 10.0 * m[3] * m[3] +
             30.0 * m[2] * m[2] * m[2];
  // Orders above 6 go through the generic partition sum.
  for (int r = 7; r <= max_order; ++r)
    out[r - 1] = sample_joint_cumulant(x, MultiIndex::repeated(0, r));
  return out;
}

}  // namespace cgflab
