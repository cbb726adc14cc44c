#include "cgflab/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cgflab/cumulants.hpp"
#include "cgflab/errors.hpp"
#include "cgflab/parallel.hpp"
#include "cgflab/rng.hpp"

namespace cgflab {

namespace {

Eigen::MatrixXd factor_scale(const Eigen::MatrixXd& gamma) {
  Eigen::LLT<Eigen::MatrixXd> llt(gamma);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  // Singular or slightly indefinite: fall back to an eigendecomposition
  // and clip small negative eigenvalues.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gamma);
  if (eig.info() != Eigen::Success) {
    throw NumericError("eigendecomposition of the scale matrix failed");
  }
  const double tol = 1e-10 * std::max(gamma.trace(), 1e-300);
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < -tol) {
      char buf[128];
      std::snprintf(buf, sizeof(buf),
                    "scale matrix is not positive semidefinite "
                    "(eigenvalue %.6g)",
                    lambda[i]);
      throw InputError(buf);
    }
    lambda[i] = std::max(lambda[i], 0.0);
  }
  return eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
}

double draw_mixing(const GammaMixture& mix, Rng& rng) {
  if (mix.degenerate) {
    return mix.point;  // consumes no randomness
  }
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t pick = mix.weights.size() - 1;
  for (std::size_t c = 0; c < mix.weights.size(); ++c) {
    acc += mix.weights[c];
    if (u < acc) {
      pick = c;
      break;
    }
  }
  return rng.gamma(mix.shapes[pick], mix.scales[pick]);
}

// One replicate worth of row sums, drawn exactly as sample_model would.
Eigen::VectorXd replicate_sums(const EllipticalCgf& model,
                               const Eigen::MatrixXd& scale,
                               const GammaMixture& mix, long n,
                               std::uint64_t seed, std::uint64_t stream) {
  const Eigen::Index dim = model.dimension();
  Rng rng(seed, stream);
  Eigen::VectorXd z(dim);
  Eigen::VectorXd sums(n);
  const double mean_total = model.m().sum();
  for (long i = 0; i < n; ++i) {
    const double v = draw_mixing(mix, rng);
    for (Eigen::Index j = 0; j < dim; ++j) {
      z[j] = rng.normal();
    }
    sums[i] = mean_total + std::sqrt(v) * (scale * z).sum();
  }
  return sums;
}

void check_plan(const SimulationPlan& plan) {
  if (plan.n < 1) {
    throw InputError("replicate size must be at least 1");
  }
  if (plan.replicates < 1) {
    throw InputError("replicate count must be at least 1");
  }
  for (double p : plan.levels) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InputError("quantile levels must lie in [0, 1]");
    }
  }
}

std::vector<double> band_pair(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  return {type7_quantile(values, 0.025), type7_quantile(values, 0.975)};
}

}  // namespace

std::vector<double> SimulationPlan::default_levels() {
  return {0.0,    0.001,  0.005, 0.01,  0.05,  0.10,  0.20,  0.25,  0.50,
          0.75,   0.80,   0.90,  0.95,  0.99,  0.995, 0.999, 0.9999, 1.0};
}

Eigen::MatrixXd sample_model(const EllipticalCgf& model,
                             const GammaMixture& mix, long n,
                             std::uint64_t seed, std::uint64_t stream) {
  if (n < 1) {
    throw InputError("sample size must be at least 1");
  }
  mix.validate();
  const Eigen::Index dim = model.dimension();
  const Eigen::MatrixXd scale = factor_scale(model.Gamma());
  Rng rng(seed, stream);
  Eigen::VectorXd z(dim);
  Eigen::MatrixXd out(n, dim);
  for (long i = 0; i < n; ++i) {
    const double v = draw_mixing(mix, rng);
    for (Eigen::Index j = 0; j < dim; ++j) {
      z[j] = rng.normal();
    }
    out.row(i) = (model.m() + std::sqrt(v) * (scale * z)).transpose();
  }
  return out;
}

double type7_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) {
    throw InputError("quantile of an empty sample");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InputError("quantile level must lie in [0, 1]");
  }
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) {
    return sorted.back();
  }
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

QuantileBands monte_carlo_bands(const EllipticalCgf& model,
                                const GammaMixture& mix,
                                const SimulationPlan& plan,
                                const Eigen::VectorXd* observed_sums) {
  SimulationPlan run = plan;
  if (run.levels.empty()) {
    run.levels = SimulationPlan::default_levels();
  }
  check_plan(run);
  mix.validate();
  const Eigen::MatrixXd scale = factor_scale(model.Gamma());
  const std::size_t n_levels = run.levels.size();

  // rep -> quantiles at each level
  std::vector<std::vector<double>> rep_quantiles(run.replicates);
  parallel_for(static_cast<std::size_t>(run.replicates), [&](std::size_t r) {
    Eigen::VectorXd sums = replicate_sums(model, scale, mix, run.n, run.seed,
                                          static_cast<std::uint64_t>(r));
    std::vector<double> sorted(sums.data(), sums.data() + sums.size());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> q(n_levels);
    for (std::size_t k = 0; k < n_levels; ++k) {
      q[k] = type7_quantile(sorted, run.levels[k]);
    }
    rep_quantiles[r] = std::move(q);
  });

  QuantileBands bands;
  bands.levels = run.levels;
  bands.lower.resize(n_levels);
  bands.upper.resize(n_levels);
  std::vector<double> column(run.replicates);
  for (std::size_t k = 0; k < n_levels; ++k) {
    for (long r = 0; r < run.replicates; ++r) {
      column[static_cast<std::size_t>(r)] = rep_quantiles[r][k];
    }
    const auto pair = band_pair(column);
    bands.lower[k] = pair[0];
    bands.upper[k] = pair[1];
  }
  if (observed_sums != nullptr) {
    std::vector<double> sorted(observed_sums->data(),
                               observed_sums->data() + observed_sums->size());
    if (sorted.empty()) {
      throw InputError("observed sums are empty");
    }
    std::sort(sorted.begin(), sorted.end());
    bands.observed.resize(n_levels);
    for (std::size_t k = 0; k < n_levels; ++k) {
      bands.observed[k] = type7_quantile(sorted, run.levels[k]);
    }
  }
  return bands;
}

double BlockMaximaEcdf::operator()(double x) const {
  const auto it = std::upper_bound(maxima.begin(), maxima.end(), x);
  return static_cast<double>(it - maxima.begin()) /
         static_cast<double>(maxima.size());
}

BlockMaximaEcdf block_maxima_ecdf(const Eigen::VectorXd& sums, int block) {
  if (block < 1) {
    throw InputError("block length must be at least 1");
  }
  const long nblocks = sums.size() / block;
  if (nblocks < 2) {
    throw InputError("series shorter than two blocks");
  }
  BlockMaximaEcdf out;
  out.maxima.resize(nblocks);
  for (long b = 0; b < nblocks; ++b) {
    out.maxima[static_cast<std::size_t>(b)] =
        sums.segment(b * block, block).maxCoeff();
  }
  std::sort(out.maxima.begin(), out.maxima.end());
  return out;
}

EcdfBands block_maxima_bands(const EllipticalCgf& model,
                             const GammaMixture& mix,
                             const SimulationPlan& plan,
                             const Eigen::VectorXd* observed_sums) {
  SimulationPlan run = plan;
  if (run.levels.empty()) {
    run.levels = SimulationPlan::default_levels();
  }
  check_plan(run);
  if (run.n / run.block < 2) {
    throw InputError("replicate size is shorter than two blocks");
  }
  mix.validate();
  const Eigen::MatrixXd scale = factor_scale(model.Gamma());

  std::vector<BlockMaximaEcdf> rep_ecdf(run.replicates);
  parallel_for(static_cast<std::size_t>(run.replicates), [&](std::size_t r) {
    Eigen::VectorXd sums = replicate_sums(model, scale, mix, run.n, run.seed,
                                          static_cast<std::uint64_t>(r));
    rep_ecdf[r] = block_maxima_ecdf(sums, run.block);
  });

  double lo = rep_ecdf[0].maxima.front();
  double hi = rep_ecdf[0].maxima.back();
  for (const auto& e : rep_ecdf) {
    lo = std::min(lo, e.maxima.front());
    hi = std::max(hi, e.maxima.back());
  }

  constexpr int kGridPoints = 101;
  EcdfBands bands;
  bands.grid.resize(kGridPoints);
  bands.lower.resize(kGridPoints);
  bands.upper.resize(kGridPoints);
  std::vector<double> column(run.replicates);
  for (int g = 0; g < kGridPoints; ++g) {
    const double x = lo + (hi - lo) * g / (kGridPoints - 1);
    bands.grid[static_cast<std::size_t>(g)] = x;
    for (long r = 0; r < run.replicates; ++r) {
      column[static_cast<std::size_t>(r)] = rep_ecdf[static_cast<std::size_t>(r)](x);
    }
    const auto pair = band_pair(column);
    bands.lower[static_cast<std::size_t>(g)] = pair[0];
    bands.upper[static_cast<std::size_t>(g)] = pair[1];
  }
  if (observed_sums != nullptr) {
    const BlockMaximaEcdf obs = block_maxima_ecdf(*observed_sums, run.block);
    bands.observed.resize(kGridPoints);
    for (int g = 0; g < kGridPoints; ++g) {
      bands.observed[static_cast<std::size_t>(g)] =
          obs(bands.grid[static_cast<std::size_t>(g)]);
    }
  }
  return bands;
}

std::vector<ReplicateSummary> simulate_replicate_summaries(
    const EllipticalCgf& model, const GammaMixture& mix,
    const SimulationPlan& plan) {
  check_plan(plan);
  mix.validate();
  const Eigen::MatrixXd scale = factor_scale(model.Gamma());
  std::vector<ReplicateSummary> out(plan.replicates);
  parallel_for(static_cast<std::size_t>(plan.replicates), [&](std::size_t r) {
    Eigen::VectorXd sums = replicate_sums(model, scale, mix, plan.n, plan.seed,
                                          static_cast<std::uint64_t>(r));
    const std::vector<double> kappa = sample_cumulants_of_series(sums, 6);
    ReplicateSummary s;
    s.replicate = static_cast<long>(r);
    s.kappa2 = kappa[1];
    s.kappa4 = kappa[3];
    s.kappa6 = kappa[5];
    out[r] = s;
  });
  return out;
}

}  // namespace cgflab
