#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "cgflab/cgf_model.hpp"
#include "cgflab/cumulants.hpp"

namespace cgflab {

struct SaddlepointSolution {
  Eigen::VectorXd s;        // solves grad K(s) = x
  double value = 0.0;       // K(s)
  Eigen::MatrixXd hessian;  // Hessian of K at s
  double residual = 0.0;    // |grad K(s) - x|
  int iterations = 0;
};

// Damped Newton solve of grad K(s) = x from s0 = H(0)^-1 (x - grad K(0)).
// Converges to |grad K(s) - x| <= 1e-10 (1 + |x|); throws NumericError if
// 100 iterations do not get there.  x must lie in the interior of the
// gradient range.
SaddlepointSolution solve_saddlepoint(const CgfOracle& cgf,
                                      const Eigen::VectorXd& x);

// First-order saddlepoint density
//   f(x) = exp(K(s) - s'x) / ((2 pi)^(J/2) det(H(s))^(1/2)).
double saddlepoint_density(const CgfOracle& cgf, const Eigen::VectorXd& x);
double saddlepoint_density(const SaddlepointSolution& sol,
                           const Eigen::VectorXd& x);

// Generalized Hermite polynomials of a scale matrix: h_() = 1 and
//   h_{A + j}(x) = (G^-1 x)_j h_A(x) - sum_{a in A} (G^-1)_{j a} h_{A \ a}(x).
// For Gamma = I these reduce to products of univariate Hermite polynomials.
// Order is capped at 6 and Gamma must be well conditioned (< 1e12).
class HermiteEvaluator {
 public:
  explicit HermiteEvaluator(const Eigen::MatrixXd& Gamma);
  void set_point(const Eigen::VectorXd& x);
  // idx holds coordinate indices, any order, size in [1, 6].
  double value(const std::vector<int>& idx);

 private:
  double recurse(std::vector<int>& idx);

  Eigen::MatrixXd precision_;
  Eigen::VectorXd px_;
  int dimension_;
  std::map<std::vector<int>, double> memo_;
};

double hermite_tensor(const Eigen::VectorXd& x, const Eigen::MatrixXd& Gamma,
                      const std::vector<int>& idx);

// Density of the Gaussian with mean zero and covariance Gamma.
double gaussian_density(const Eigen::VectorXd& x, const Eigen::MatrixXd& Gamma);

// Edgeworth density expansion about the Gaussian base phi_Gamma for a
// centered argument x:
//   phi_Gamma(x) [1 + (1/6) k3.h3 + (1/24) k4.h4 + (1/72) (k3 x k3).h6]
// with full symmetric tensor contractions.  When kappa4 is absent only the
// order-3 correction is applied.  Can be negative in the tails.
double edgeworth_density(const Eigen::VectorXd& x, const Eigen::MatrixXd& Gamma,
                         const CumulantTensor& kappa3,
                         const CumulantTensor* kappa4 = nullptr);

// Tail CDF approximation F(x0) ~ Phi(r) + phi(r) (1/r - 1/q) with
// r = sign(t) sqrt(2 (t x0 - K(t))), q = t sqrt(K''(t)), K'(t) = x0.
// Near the mean (|r| < 1e-4) the removable singularity is evaluated by a
// series in t using cumulants up to order 5.  The result is clamped to
// [0, 1].  Exact for Gaussian CGFs.
double lugannani_rice_cdf(const UnivariateCgf& cgf, double x0);

// Fourth-order Cornish-Fisher quantile from cumulants kappa1..kappa4:
//   x_p = k1 + sqrt(k2) [ z + (z^2-1) g1/6 + (z^3-3z) g2/24
//                           - (2z^3-5z) g1^2/36 ],
// g1, g2 the skewness and excess kurtosis.  Requires kappa2 > 0, p in (0,1).
double cornish_fisher_quantile(double kappa1, double kappa2, double kappa3,
                               double kappa4, double p);

// Inner weights for the skew correction of entropy_approx.  kOrthogonal
// weights the three distinct third-order index patterns by their squared
// norm multiplicities {1, 3, 6}; kAlternate uses {1, 3, 1/6}, a variant
// that appears in some references and is kept for comparison.  Numerical
// quadrature of the skewed density confirms kOrthogonal.
enum class EntropyWeights { kOrthogonal, kAlternate };

// Differential entropy of the Gaussian with covariance Gamma.
double gaussian_entropy(const Eigen::MatrixXd& Gamma);

// Entropy approximation: Gaussian entropy minus a quadratic skew penalty,
//   H ~ H(phi_Gamma) - (1/12) [ sum_j k_jjj^2 + 3 sum_{i != j} k_iij^2
//                                 + w sum_{i<j<k} k_ijk^2 ].
double entropy_approx(const Eigen::MatrixXd& Gamma,
                      const CumulantTensor& kappa3,
                      EntropyWeights weights = EntropyWeights::kOrthogonal);

struct TailProbResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

// Joint upper-tail probability P(X_j > t_j for all j in subset) of a
// marginal sub-model, by tensor Gauss-Legendre quadrature of the
// saddlepoint density.  The integration box extends 12 standard
// deviations past mean or threshold and the refinement pass (more nodes,
// a wider box) bounds truncation and quadrature error together.
// |subset| <= 5.
TailProbResult tail_prob_marginal(const EllipticalCgf& model,
                                  const std::vector<int>& subset,
                                  const Eigen::VectorXd& thresholds);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights);

}  // namespace cgflab
