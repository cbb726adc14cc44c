#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <vector>

#include "cgflab/partitions.hpp"

namespace cgflab {

// Supplies joint CDF values for arbitrary sub-vectors of a J-dimensional
// distribution.  `subset` is sorted, distinct, and indexes the coordinates
// of x positionally: cdf({0, 2}, (a, b)) = P(X_0 <= a, X_2 <= b).
class MarginalOracle {
 public:
  virtual ~MarginalOracle() = default;
  virtual int dimension() const = 0;
  virtual double cdf(const std::vector<int>& subset,
                     const Eigen::VectorXd& x) const = 0;
};

// Empirical joint CDF of a data matrix: F(x) = (1/n) #{rows <= x on subset}.
class EmpiricalOracle : public MarginalOracle {
 public:
  explicit EmpiricalOracle(Eigen::MatrixXd data);
  int dimension() const override { return static_cast<int>(data_.cols()); }
  double cdf(const std::vector<int>& subset,
             const Eigen::VectorXd& x) const override;

 private:
  Eigen::MatrixXd data_;
  std::vector<std::vector<double>> sorted_columns_;
};

// Product of univariate CDFs: an independent (fully decomposable) joint law.
class ProductOracle : public MarginalOracle {
 public:
  using Cdf = std::function<double(double)>;
  explicit ProductOracle(std::vector<Cdf> marginals);
  int dimension() const override { return static_cast<int>(marginals_.size()); }
  double cdf(const std::vector<int>& subset,
             const Eigen::VectorXd& x) const override;

 private:
  std::vector<Cdf> marginals_;
};

// Tensor quadrature grid: per-axis bounds, common node count per axis.
struct GridSpec {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  int nodes = 64;
};

// Product of block marginal CDFs for one partition of {0, ..., J-1}.
double partition_apply(const MarginalOracle& oracle, const SetPartition& p,
                       const Eigen::VectorXd& x);

// Lancaster interaction at x: the Moebius-weighted sum of partition_apply
// over all partitions of the coordinate set.  Vanishes identically whenever
// the law decomposes into independent sub-vectors.  J <= 6.
double lancaster_measure(const MarginalOracle& oracle,
                         const Eigen::VectorXd& x);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int nodes_coarse = 0;
  int nodes_fine = 0;
};

// Joint cumulant of (X_1, ..., X_J) as (-1)^J times the integral of the
// Lancaster interaction over the grid box (midpoint rule, one refinement
// with doubled nodes; the returned value is the refined one and the error
// estimate is the Richardson difference).  J in {2, 3}.  The grid must
// cover effectively all mass: each axis marginal CDF <= 1e-4 at the lower
// bound and >= 1 - 1e-4 at the upper bound.  Throws NumericError if the
// error estimate exceeds `tolerance`.
QuadratureResult cumulant_via_lancaster_integral(
    const MarginalOracle& oracle, const GridSpec& grid,
    double tolerance = std::numeric_limits<double>::infinity());

}  // namespace cgflab
