#include "cgflab/lancaster.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "cgflab/cumulants.hpp"
#include "cgflab/errors.hpp"

namespace cgflab {

namespace {
constexpr int kMaxLancasterDim = 6;
constexpr double kMassTail = 1e-4;

void check_subset(int dimension, const std::vector<int>& subset,
                  Eigen::Index x_size) {
  if (subset.empty()) throw InputError("marginal cdf: empty subset");
  if (static_cast<Eigen::Index>(subset.size()) != x_size)
    throw InputError("marginal cdf: subset/point size mismatch");
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (subset[k] < 0 || subset[k] >= dimension)
      throw InputError("marginal cdf: index " + std::to_string(subset[k]) +
                       " out of range");
    if (k > 0 && subset[k] <= subset[k - 1])
      throw InputError("marginal cdf: subset must be sorted and distinct");
  }
}
}  // namespace

EmpiricalOracle::EmpiricalOracle(Eigen::MatrixXd data)
    : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1)
    throw InputError("EmpiricalOracle: empty data");
  sorted_columns_.resize(data_.cols());
  for (Eigen::Index j = 0; j < data_.cols(); ++j) {
    auto& col = sorted_columns_[j];
    col.resize(data_.rows());
    for (Eigen::Index i = 0; i < data_.rows(); ++i) col[i] = data_(i, j);
    std::sort(col.begin(), col.end());
  }
}

double EmpiricalOracle::cdf(const std::vector<int>& subset,
                            const Eigen::VectorXd& x) const {
  check_subset(dimension(), subset, x.size());
  const double n = static_cast<double>(data_.rows());
  if (subset.size() == 1) {
    const auto& col = sorted_columns_[subset[0]];
    const auto it = std::upper_bound(col.begin(), col.end(), x[0]);
    return static_cast<double>(it - col.begin()) / n;
  }
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < data_.rows(); ++i) {
    bool all = true;
    for (std::size_t k = 0; k < subset.size(); ++k) {
      if (data_(i, subset[k]) > x[k]) {
        all = false;
        break;
      }
    }
    count += all;
  }
  return static_cast<double>(count) / n;
}

ProductOracle::ProductOracle(std::vector<Cdf> marginals)
    : marginals_(std::move(marginals)) {
  if (marginals_.empty()) throw InputError("ProductOracle: no marginals");
}

double ProductOracle::cdf(const std::vector<int>& subset,
                          const Eigen::VectorXd& x) const {
  check_subset(dimension(), subset, x.size());
  double p = 1.0;
  for (std::size_t k = 0; k < subset.size(); ++k)
    p *= marginals_[subset[k]](x[k]);
  return p;
}

double partition_apply(const MarginalOracle& oracle, const SetPartition& p,
                       const Eigen::VectorXd& x) {
  if (p.ground_size != oracle.dimension() ||
      x.size() != static_cast<Eigen::Index>(p.ground_size))
    throw InputError("partition_apply: dimension mismatch");
  double prod = 1.0;
  for (const auto& block : p.blocks) {
    Eigen::VectorXd xb(block.size());
    for (std::size_t k = 0; k < block.size(); ++k) xb[k] = x[block[k]];
    prod *= oracle.cdf(block, xb);
  }
  return prod;
}

double lancaster_measure(const MarginalOracle& oracle,
                         const Eigen::VectorXd& x) {
  const int J = oracle.dimension();
  if (J < 1 || J > kMaxLancasterDim)
    throw InputError("lancaster_measure: dimension must be in [1, " +
                     std::to_string(kMaxLancasterDim) + "]");
  if (x.size() != J) throw InputError("lancaster_measure: point has wrong size");

  // Distinct blocks recur across partitions; evaluate each block CDF once.
  std::map<std::vector<int>, double> block_cdf;
  const auto& parts = partitions_of(J);
  for (const SetPartition& p : parts)
    for (const auto& block : p.blocks)
      if (!block_cdf.count(block)) {
        Eigen::VectorXd xb(block.size());
        for (std::size_t k = 0; k < block.size(); ++k) xb[k] = x[block[k]];
        block_cdf[block] = oracle.cdf(block, xb);
      }

  KahanSum acc;
  for (const SetPartition& p : parts) {
    double term = static_cast<double>(mobius_weight(p));
    for (const auto& block : p.blocks) term *= block_cdf.find(block)->second;
    acc.add(term);
  }
  return acc.value();
}

namespace {
double midpoint_integral(const MarginalOracle& oracle, const GridSpec& grid,
                         int nodes) {
  const int J = oracle.dimension();
  Eigen::VectorXd h(J);
  for (int j = 0; j < J; ++j)
    h[j] = (grid.upper[j] - grid.lower[j]) / static_cast<double>(nodes);
  double cell = 1.0;
  for (int j = 0; j < J; ++j) cell *= h[j];

  KahanSum acc;
  std::vector<int> ix(J, 0);
  Eigen::VectorXd x(J);
  for (;;) {
    for (int j = 0; j < J; ++j)
      x[j] = grid.lower[j] + (static_cast<double>(ix[j]) + 0.5) * h[j];
    acc.add(lancaster_measure(oracle, x));
    int j = J - 1;
    while (j >= 0 && ++ix[j] == nodes) ix[j--] = 0;
    if (j < 0) break;
  }
  return acc.value() * cell;
}
}  // namespace

QuadratureResult cumulant_via_lancaster_integral(const MarginalOracle& oracle,
                                                 const GridSpec& grid,
                                                 double tolerance) {
  const int J = oracle.dimension();
  if (J != 2 && J != 3)
    throw InputError(
        "cumulant_via_lancaster_integral: dimension must be 2 or 3");
  if (grid.lower.size() != J || grid.upper.size() != J)
    throw InputError("cumulant_via_lancaster_integral: grid has wrong size");
  if (grid.nodes < 8)
    throw InputError("cumulant_via_lancaster_integral: need >= 8 nodes");
  for (int j = 0; j < J; ++j) {
    if (!(grid.lower[j] < grid.upper[j]))
      throw InputError("cumulant_via_lancaster_integral: empty axis range");
    Eigen::VectorXd lo(1), hi(1);
    lo[0] = grid.lower[j];
    hi[0] = grid.upper[j];
    const std::vector<int> axis{j};
    if (oracle.cdf(axis, lo) > kMassTail)
      throw InputError("cumulant_via_lancaster_integral: axis " +
                       std::to_string(j) +
                       " lower bound leaves mass below the grid");
    if (oracle.cdf(axis, hi) < 1.0 - kMassTail)
      throw InputError("cumulant_via_lancaster_integral: axis " +
                       std::to_string(j) +
                       " upper bound leaves mass above the grid");
  }

  const double sign = (J % 2 == 0) ? 1.0 : -1.0;
  const double coarse = sign * midpoint_integral(oracle, grid, grid.nodes);
  const double fine = sign * midpoint_integral(oracle, grid, 2 * grid.nodes);

  QuadratureResult result;
  result.value = fine;
  result.error_estimate = std::abs(fine - coarse) / 3.0;
  result.nodes_coarse = grid.nodes;
  result.nodes_fine = 2 * grid.nodes;
  if (result.error_estimate > tolerance)
    throw NumericError(
        "cumulant_via_lancaster_integral: refinement disagreement " +
        std::to_string(result.error_estimate) + " exceeds tolerance " +
        std::to_string(tolerance));
  return result;
}

}  // namespace cgflab
