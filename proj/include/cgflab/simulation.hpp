#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cgflab/cgf_model.hpp"
#include "cgflab/estimation.hpp"

namespace cgflab {

struct SimulationPlan {
  long n = 10950;          // observations per replicate
  long replicates = 1000;  // Monte Carlo replicates
  std::uint64_t seed = 0;
  std::vector<double> levels;  // quantile levels in [0, 1]; 0 = min, 1 = max
  int block = 365;             // block length for block maxima

  // Levels of the standard sum-quantile table (percent / 100).
  static std::vector<double> default_levels();
};

// One draw of the model: rows are observations of Y = m + sqrt(V) X with
// X ~ N(0, Gamma) and V from the mixing distribution.  Per row the draw
// order is fixed (V first, then the J normals), so output is a pure
// function of (model, mix, n, seed, stream).  Distinct streams of one seed
// are independent; monte_carlo_bands uses stream = replicate index.
Eigen::MatrixXd sample_model(const EllipticalCgf& model,
                             const GammaMixture& mix, long n,
                             std::uint64_t seed, std::uint64_t stream = 0);

// Type 7 (linear interpolation) quantile of already sorted values.
double type7_quantile(const std::vector<double>& sorted, double p);

struct QuantileBands {
  std::vector<double> levels;
  std::vector<double> lower;     // 2.5% across replicates
  std::vector<double> upper;     // 97.5% across replicates
  std::vector<double> observed;  // quantiles of observed sums, if given
};

// Per-level empirical 95% bands of the row-sum quantiles across
// replicates.  When observed row sums are supplied their quantiles fill
// the observed column.
QuantileBands monte_carlo_bands(const EllipticalCgf& model,
                                const GammaMixture& mix,
                                const SimulationPlan& plan,
                                const Eigen::VectorXd* observed_sums = nullptr);

struct BlockMaximaEcdf {
  std::vector<double> maxima;  // sorted block maxima
  double operator()(double x) const;
};

// Maxima of consecutive length-`block` windows of sums (remainder rows
// discarded), as an empirical CDF.
BlockMaximaEcdf block_maxima_ecdf(const Eigen::VectorXd& sums, int block);

struct EcdfBands {
  std::vector<double> grid;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> observed;  // observed block-maxima ECDF, if given
};

// Pointwise 95% envelope of the replicate block-maxima ECDFs on a fixed
// evaluation grid spanning all replicate maxima.
EcdfBands block_maxima_bands(const EllipticalCgf& model,
                             const GammaMixture& mix,
                             const SimulationPlan& plan,
                             const Eigen::VectorXd* observed_sums = nullptr);

struct ReplicateSummary {
  long replicate = 0;
  double kappa2 = 0.0;
  double kappa4 = 0.0;
  double kappa6 = 0.0;
};

// Plug-in sum cumulants of each replicate's row sums.
std::vector<ReplicateSummary> simulate_replicate_summaries(
    const EllipticalCgf& model, const GammaMixture& mix,
    const SimulationPlan& plan);

}  // namespace cgflab
