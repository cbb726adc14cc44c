#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <compare>
#include <map>
#include <string>
#include <vector>

namespace cgflab {

// Sorted multi-index (j_1 <= ... <= j_d) naming the variables of a joint
// moment or cumulant; repeats raise the power of a variable.  Order d is
// capped at 8, the highest order the partition machinery supports.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> indices);

  static MultiIndex repeated(int index, int count);

  const std::vector<int>& indices() const { return ix_; }
  int order() const { return static_cast<int>(ix_.size()); }
  int max_index() const { return ix_.empty() ? -1 : ix_.back(); }

  // Number of distinct orderings of the index (multinomial coefficient).
  long long distinct_permutations() const;

  std::string to_string() const;

  auto operator<=>(const MultiIndex&) const = default;

 private:
  std::vector<int> ix_;
};

constexpr int kMaxCumulantOrder = 8;

// Raw moments E(prod_j X_j) keyed by multi-index, for a fixed dimension.
// The order-0 moment is the constant 1 and is implicit.
class MomentSet {
 public:
  explicit MomentSet(int dimension);

  int dimension() const { return dimension_; }
  void set(const MultiIndex& idx, double value);
  bool contains(const MultiIndex& idx) const;
  // Throws InputError naming the multi-index if it is absent.
  double at(const MultiIndex& idx) const;

  // Plug-in sample moments (averages of observed products, no bias
  // correction) for every multi-index up to max_order over the given
  // columns of data (rows are observations).
  static MomentSet from_data(const Eigen::MatrixXd& data,
                             const std::vector<int>& columns, int max_order);
  static MomentSet from_data(const Eigen::MatrixXd& data, int max_order);

  const std::map<MultiIndex, double>& values() const { return values_; }

 private:
  int dimension_;
  std::map<MultiIndex, double> values_;
};

// Joint cumulants of mixed orders keyed by multi-index.
class CumulantSet {
 public:
  explicit CumulantSet(int dimension);

  int dimension() const { return dimension_; }
  void set(const MultiIndex& idx, double value);
  bool contains(const MultiIndex& idx) const;
  // Throws InputError naming the multi-index if it is absent.
  double at(const MultiIndex& idx) const;

  const std::map<MultiIndex, double>& values() const { return values_; }

 private:
  int dimension_;
  std::map<MultiIndex, double> values_;
};

// Symmetric cumulant tensor of a single order; only sorted multi-indices
// are stored.  at() returns 0 for absent entries, which makes sparse
// tensors (a few nonzero skews, say) convenient to build by hand.
class CumulantTensor {
 public:
  CumulantTensor(int dimension, int order);

  int dimension() const { return dimension_; }
  int order() const { return order_; }
  void set(const MultiIndex& idx, double value);
  double at(const MultiIndex& idx) const;
  const std::map<MultiIndex, double>& values() const { return values_; }

  // Every entry of the order tensor from plug-in sample moments.
  static CumulantTensor from_data(const Eigen::MatrixXd& data, int order);

 private:
  int dimension_;
  int order_;
  std::map<MultiIndex, double> values_;
};

// Joint cumulant of the variables in idx from raw moments: the partition
// sum with Moebius weights over all set partitions of the index positions.
// All moments for sub-multi-indices of idx must be present.
double cumulant_from_moments(const MomentSet& moments, const MultiIndex& idx);

// Raw moment of the variables in idx from joint cumulants: the partition
// sum of products of block cumulants.  All cumulants for sub-multi-indices
// of idx must be present.
double moment_from_cumulants(const CumulantSet& cumulants,
                             const MultiIndex& idx);

// Plug-in sample joint cumulant of the data columns named by idx.
// Accumulation is compensated (Neumaier) so results are deterministic and
// stable for the supported orders.
double sample_joint_cumulant(const Eigen::MatrixXd& data,
                             const MultiIndex& idx);

// Order-r cumulant of sum_{j in subset} X_j, expanded by multilinearity
// into joint cumulants of the subset columns with multinomial weights.
// Identical (up to roundoff) to the univariate order-r sample cumulant of
// the summed column.
double cumulant_of_sum(const Eigen::MatrixXd& data,
                       const std::vector<int>& subset, int r);

// Univariate plug-in sample cumulants (orders 1..max_order) of a series;
// central-moment fast path for orders <= 6, partition sum above that.
std::vector<double> sample_cumulants_of_series(const Eigen::VectorXd& x,
                                               int max_order);

// Neumaier compensated accumulator.
class KahanSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace cgflab
