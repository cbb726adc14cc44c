#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace cgflab {

// Finite mixture of gamma distributions for the mixing variable V, or a
// point mass when `degenerate` is set (components empty).  weights are
// positive and sum to 1 within 1e-12.
struct GammaMixture {
  std::vector<double> weights;
  std::vector<double> shapes;
  std::vector<double> scales;
  bool degenerate = false;
  double point = 1.0;
  double fit_residual = 0.0;  // max relative residual of the producing fit

  int component_count() const { return static_cast<int>(weights.size()); }
  void validate() const;

  // Raw moment E(V^r) and cumulant of V, r in [1, 8].
  double moment(int r) const;
  double cumulant(int r) const;

  static GammaMixture point_mass(double value);
};

// Kendall tau-b of two equal-length series, O(n log n) (merge sort
// inversion counting with tie corrections).  Throws InputError when a
// series is constant (tau-b undefined).
double kendall_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct CovarianceEstimate {
  Eigen::MatrixXd Gamma;        // scale matrix estimate, PSD
  Eigen::MatrixXd correlation;  // sin(pi/2 tau) matrix before projection
  double psd_adjustment = 0.0;  // Frobenius norm of the PSD projection shift
  bool psd_projected = false;
};

// Rank-based scale matrix estimate: pairwise Kendall tau mapped through
// sin(pi/2 tau), scaled by plug-in standard deviations, then projected to
// the nearest PSD matrix if an eigenvalue is materially negative.
// Requires n >= 10 rows; throws InputError naming any constant column.
CovarianceEstimate estimate_covariance(const Eigen::MatrixXd& data);

// Closed-form coefficient recovery from sum cumulants: with T the total
// sum of Gamma, kappa_{2r}(S) = (2r-1)!! c_r T^r inverts to
// c_r = kappa_{2r} / ((2r-1)!! T^r).  orders must be {2, 4, ..., 2R} and
// match sum_cumulant_values elementwise.
Eigen::VectorXd fit_coefficients(const Eigen::MatrixXd& Gamma,
                                 const std::vector<double>& sum_cumulant_values,
                                 const std::vector<int>& orders);

// Fits a gamma mixture whose cumulants (orders 1..R) match `targets`:
// Levenberg-Marquardt on log-parameters with softmax weights, 16
// deterministic multi-starts, best kept by max relative residual.
// Residual <= 1e-4 is full success; above 1e-3 throws FitError carrying
// the best residual; in between the mixture is returned with the residual
// recorded in fit_residual.
GammaMixture fit_gamma_mixture(const std::vector<double>& targets,
                               int n_components);

// Powered exponential covariance with nugget:
//   C(0) = sigma0_sq + sigma1_sq,
//   C(d) = sigma1_sq * exp(-(d / theta1)^theta2) for d > 0.
struct PoweredExpParams {
  double sigma0_sq = 0.0;
  double sigma1_sq = 1.0;
  double theta1 = 1.0;
  double theta2 = 1.0;
};

double powered_exp_cov(double distance, const PoweredExpParams& params);

// Gamma matrix over planar locations from pairwise Euclidean distances.
Eigen::MatrixXd build_gamma(const std::vector<std::array<double, 2>>& locations,
                            const PoweredExpParams& params);

}  // namespace cgflab
