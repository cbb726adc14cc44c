#include "cgflab/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cgflab/errors.hpp"
#include "cgflab/normal.hpp"

namespace cgflab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;
constexpr double kLrSeriesWindow = 1e-4;  // |r| below which the series runs

void check_finite_point(const Eigen::VectorXd& x, const char* who) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]))
      throw InputError(std::string(who) + ": non-finite point");
}
}  // namespace

// ---------------------------------------------------------------------------
// saddlepoint

namespace {
SaddlepointSolution solve_saddlepoint_impl(const CgfOracle& cgf,
                                           const Eigen::VectorXd& x,
                                           const Eigen::VectorXd* guess) {
  const int J = cgf.dimension();
  if (x.size() != J) throw InputError("solve_saddlepoint: wrong point size");
  check_finite_point(x, "solve_saddlepoint");

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(J);
  Eigen::VectorXd s;
  if (guess) {
    s = *guess;
  } else {
    const Eigen::VectorXd g0 = cgf.gradient(zero);
    const Eigen::MatrixXd H0 = cgf.hessian(zero);
    s = H0.ldlt().solve(x - g0);
  }
  if (!s.allFinite()) s = zero;
  // Pull the start into the CGF domain if necessary.
  for (int k = 0; k < 100 && !std::isfinite(cgf.value(s)); ++k) s *= 0.5;

  const double tol = 1e-10 * (1.0 + x.norm());
  Eigen::VectorXd grad = cgf.gradient(s);
  double res = grad.allFinite()
                   ? (grad - x).norm()
                   : std::numeric_limits<double>::infinity();

  SaddlepointSolution sol;
  for (int iter = 0; iter <= 100; ++iter) {
    if (res <= tol) {
      sol.s = s;
      sol.value = cgf.value(s);
      sol.hessian = cgf.hessian(s);
      sol.residual = res;
      sol.iterations = iter;
      return sol;
    }
    if (iter == 100) break;
    const Eigen::MatrixXd H = cgf.hessian(s);
    const Eigen::VectorXd step = H.ldlt().solve(grad - x);
    if (!step.allFinite())
      throw NumericError("solve_saddlepoint: singular Hessian");
    double t = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      const Eigen::VectorXd s_try = s - t * step;
      const Eigen::VectorXd g_try = cgf.gradient(s_try);
      if (g_try.allFinite()) {
        const double res_try = (g_try - x).norm();
        if (res_try < res) {
          s = s_try;
          grad = g_try;
          res = res_try;
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted)
      throw NumericError(
          "solve_saddlepoint: no descent step; point may lie outside the "
          "gradient range");
  }
  throw NumericError("solve_saddlepoint: no convergence in 100 iterations, "
                     "residual " +
                     std::to_string(res));
}
}  // namespace

SaddlepointSolution solve_saddlepoint(const CgfOracle& cgf,
                                      const Eigen::VectorXd& x) {
  return solve_saddlepoint_impl(cgf, x, nullptr);
}

double saddlepoint_density(const SaddlepointSolution& sol,
                           const Eigen::VectorXd& x) {
  const int J = static_cast<int>(x.size());
  Eigen::LLT<Eigen::MatrixXd> llt(sol.hessian);
  if (llt.info() != Eigen::Success)
    throw NumericError("saddlepoint_density: Hessian not positive definite");
  double half_logdet = 0.0;
  const Eigen::MatrixXd L = llt.matrixL();
  for (int j = 0; j < J; ++j) half_logdet += std::log(L(j, j));
  const double log_f = sol.value - sol.s.dot(x) -
                       0.5 * J * std::log(kTwoPi) - half_logdet;
  return std::exp(log_f);
}

double saddlepoint_density(const CgfOracle& cgf, const Eigen::VectorXd& x) {
  return saddlepoint_density(solve_saddlepoint(cgf, x), x);
}

// ---------------------------------------------------------------------------
// Hermite tensors

HermiteEvaluator::HermiteEvaluator(const Eigen::MatrixXd& Gamma)
    : dimension_(static_cast<int>(Gamma.rows())) {
  if (Gamma.rows() != Gamma.cols() || Gamma.rows() < 1)
    throw InputError("HermiteEvaluator: Gamma must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gamma);
  const double min_eig = es.eigenvalues().minCoeff();
  const double max_eig = es.eigenvalues().maxCoeff();
  if (!(min_eig > 0.0) || max_eig / min_eig >= 1e12)
    throw NumericError(
        "HermiteEvaluator: Gamma is singular or too ill conditioned");
  precision_ = es.eigenvectors() *
               es.eigenvalues().cwiseInverse().asDiagonal() *
               es.eigenvectors().transpose();
  px_ = Eigen::VectorXd::Zero(dimension_);
}

void HermiteEvaluator::set_point(const Eigen::VectorXd& x) {
  if (x.size() != dimension_)
    throw InputError("HermiteEvaluator: wrong point size");
  check_finite_point(x, "HermiteEvaluator");
  px_ = precision_ * x;
  memo_.clear();
}

double HermiteEvaluator::value(const std::vector<int>& idx) {
  if (idx.empty() || idx.size() > 6)
    throw InputError("HermiteEvaluator: index order must be in [1, 6]");
  for (int j : idx)
    if (j < 0 || j >= dimension_)
      throw InputError("HermiteEvaluator: coordinate out of range");
  std::vector<int> sorted = idx;
  std::sort(sorted.begin(), sorted.end());
  return recurse(sorted);
}

double HermiteEvaluator::recurse(std::vector<int>& idx) {
  if (idx.empty()) return 1.0;
  const auto it = memo_.find(idx);
  if (it != memo_.end()) return it->second;

  const int j = idx.back();
  std::vector<int> rest(idx.begin(), idx.end() - 1);
  double v = px_[j] * recurse(rest);
  for (std::size_t m = 0; m < rest.size(); ++m) {
    std::vector<int> smaller = rest;
    smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(m));
    v -= precision_(j, rest[m]) * recurse(smaller);
  }
  memo_[idx] = v;
  return v;
}

double hermite_tensor(const Eigen::VectorXd& x, const Eigen::MatrixXd& Gamma,
                      const std::vector<int>& idx) {
  HermiteEvaluator eval(Gamma);
  eval.set_point(x);
  return eval.value(idx);
}

// ---------------------------------------------------------------------------
// Edgeworth

double gaussian_density(const Eigen::VectorXd& x,
                        const Eigen::MatrixXd& Gamma) {
  const int J = static_cast<int>(x.size());
  if (Gamma.rows() != J || Gamma.cols() != J)
    throw InputError("gaussian_density: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(Gamma);
  if (llt.info() != Eigen::Success)
    throw NumericError("gaussian_density: Gamma not positive definite");
  double half_logdet = 0.0;
  const Eigen::MatrixXd L = llt.matrixL();
  for (int j = 0; j < J; ++j) half_logdet += std::log(L(j, j));
  const double quad = x.dot(llt.solve(x));
  return std::exp(-0.5 * quad - 0.5 * J * std::log(kTwoPi) - half_logdet);
}

double edgeworth_density(const Eigen::VectorXd& x, const Eigen::MatrixXd& Gamma,
                         const CumulantTensor& kappa3,
                         const CumulantTensor* kappa4) {
  const int J = static_cast<int>(x.size());
  if (kappa3.order() != 3)
    throw InputError("edgeworth_density: kappa3 must have order 3");
  if (kappa3.dimension() != J)
    throw InputError("edgeworth_density: kappa3 dimension mismatch");
  if (kappa4) {
    if (kappa4->order() != 4)
      throw InputError("edgeworth_density: kappa4 must have order 4");
    if (kappa4->dimension() != J)
      throw InputError("edgeworth_density: kappa4 dimension mismatch");
  }

  HermiteEvaluator herm(Gamma);
  herm.set_point(x);

  double correction = 0.0;
  // (1/6) contraction of kappa3 with h3 over all index permutations.
  for (const auto& [idx, v] : kappa3.values()) {
    if (v == 0.0) continue;
    correction += static_cast<double>(idx.distinct_permutations()) * v *
                  herm.value(idx.indices()) / 6.0;
  }
  if (kappa4) {
    for (const auto& [idx, v] : kappa4->values()) {
      if (v == 0.0) continue;
      correction += static_cast<double>(idx.distinct_permutations()) * v *
                    herm.value(idx.indices()) / 24.0;
    }
    // (1/72) kappa3 x kappa3 contraction with h6 over ordered pairs.
    for (const auto& [ia, va] : kappa3.values()) {
      if (va == 0.0) continue;
      const double wa = static_cast<double>(ia.distinct_permutations()) * va;
      for (const auto& [ib, vb] : kappa3.values()) {
        if (vb == 0.0) continue;
        const double wb = static_cast<double>(ib.distinct_permutations()) * vb;
        std::vector<int> joined = ia.indices();
        joined.insert(joined.end(), ib.indices().begin(), ib.indices().end());
        correction += wa * wb * herm.value(joined) / 72.0;
      }
    }
  }
  return gaussian_density(x, Gamma) * (1.0 + correction);
}

// ---------------------------------------------------------------------------
// Lugannani-Rice

namespace {
// Damped univariate Newton for K'(t) = x0.
double solve_saddlepoint_1d(const UnivariateCgf& cgf, double x0) {
  const double k1 = cgf.d1(0.0);
  const double k2 = cgf.d2(0.0);
  if (!(k2 > 0.0))
    throw NumericError("lugannani_rice_cdf: variance must be positive");
  double t = (x0 - k1) / k2;
  for (int k = 0; k < 200 && !std::isfinite(cgf.d1(t)); ++k) t *= 0.5;

  const double tol = 1e-11 * (1.0 + std::abs(x0));
  double res = cgf.d1(t) - x0;
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(res) <= tol) return t;
    const double d2 = cgf.d2(t);
    if (!(d2 > 0.0) || !std::isfinite(d2))
      throw NumericError("lugannani_rice_cdf: non-convex point in solve");
    const double step = res / d2;
    double damp = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      const double t_try = t - damp * step;
      const double d1_try = cgf.d1(t_try);
      if (std::isfinite(d1_try) && std::abs(d1_try - x0) < std::abs(res)) {
        t = t_try;
        res = d1_try - x0;
        accepted = true;
        break;
      }
      damp *= 0.5;
    }
    if (!accepted)
      throw NumericError("lugannani_rice_cdf: saddle solve stalled");
  }
  throw NumericError("lugannani_rice_cdf: saddle solve did not converge");
}
}  // namespace

double lugannani_rice_cdf(const UnivariateCgf& cgf, double x0) {
  if (!std::isfinite(x0)) throw InputError("lugannani_rice_cdf: bad x0");
  const double k2 = cgf.d2(0.0);
  if (!(k2 > 0.0))
    throw NumericError("lugannani_rice_cdf: variance must be positive");
  const double tau = solve_saddlepoint_1d(cgf, x0);
  const double sqrt_k2 = std::sqrt(k2);

  double F;
  if (std::abs(tau) * sqrt_k2 < kLrSeriesWindow) {
    // Series at the removable singularity, through tau^2.
    const double k3 = cgf.cumulant_at_zero(3);
    const double k4 = cgf.cumulant_at_zero(4);
    const double k5 = cgf.cumulant_at_zero(5);
    const double k3r = k3 / k2;
    const double k4r = k4 / k2;
    const double k5r = k5 / k2;
    // r = tau sqrt(k2) (1 + a1 tau + a2 tau^2 + a3 tau^3)
    const double a1 = k3r / 3.0;
    const double a2 = k4r / 8.0 - k3r * k3r / 18.0;
    const double a3 =
        k5r / 30.0 - k3r * k4r / 24.0 + k3r * k3r * k3r / 54.0;
    const double r =
        tau * sqrt_k2 * (1.0 + tau * (a1 + tau * (a2 + tau * a3)));
    // 1/r - 1/q = (g0 + g1 tau + g2 tau^2) / sqrt(k2)
    const double g0 = k3r / 6.0;
    const double g1 = k4r / 8.0 - 5.0 * k3r * k3r / 24.0;
    const double g2 = k5r / 20.0 - k3r * k4r / 4.0 +
                      95.0 * k3r * k3r * k3r / 432.0;
    const double correction = (g0 + tau * (g1 + tau * g2)) / sqrt_k2;
    F = normal_cdf(r) + normal_pdf(r) * correction;
  } else {
    const double w = std::max(tau * x0 - cgf.value(tau), 0.0);
    const double r = (tau < 0.0 ? -1.0 : 1.0) * std::sqrt(2.0 * w);
    const double q = tau * std::sqrt(cgf.d2(tau));
    F = normal_cdf(r) + normal_pdf(r) * (1.0 / r - 1.0 / q);
  }
  return std::clamp(F, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Cornish-Fisher

double cornish_fisher_quantile(double kappa1, double kappa2, double kappa3,
                               double kappa4, double p) {
  if (!(kappa2 > 0.0))
    throw InputError("cornish_fisher_quantile: kappa2 must be positive");
  const double z = normal_quantile(p);  // validates p in (0, 1)
  const double sd = std::sqrt(kappa2);
  const double g1 = kappa3 / (kappa2 * sd);
  const double g2 = kappa4 / (kappa2 * kappa2);
  const double z2 = z * z;
  const double adj = z + (z2 - 1.0) * g1 / 6.0 + z * (z2 - 3.0) * g2 / 24.0 -
                     z * (2.0 * z2 - 5.0) * g1 * g1 / 36.0;
  return kappa1 + sd * adj;
}

// ---------------------------------------------------------------------------
// entropy

double gaussian_entropy(const Eigen::MatrixXd& Gamma) {
  const int J = static_cast<int>(Gamma.rows());
  if (Gamma.cols() != J || J < 1)
    throw InputError("gaussian_entropy: Gamma must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(Gamma);
  if (llt.info() != Eigen::Success)
    throw NumericError("gaussian_entropy: Gamma not positive definite");
  double logdet = 0.0;
  const Eigen::MatrixXd L = llt.matrixL();
  for (int j = 0; j < J; ++j) logdet += 2.0 * std::log(L(j, j));
  return 0.5 * logdet + 0.5 * J * (std::log(kTwoPi) + 1.0);
}

double entropy_approx(const Eigen::MatrixXd& Gamma,
                      const CumulantTensor& kappa3, EntropyWeights weights) {
  if (kappa3.order() != 3)
    throw InputError("entropy_approx: kappa3 must have order 3");
  if (kappa3.dimension() != Gamma.rows())
    throw InputError("entropy_approx: kappa3 dimension mismatch");
  const double distinct_weight =
      weights == EntropyWeights::kOrthogonal ? 6.0 : 1.0 / 6.0;
  double penalty = 0.0;
  for (const auto& [idx, v] : kappa3.values()) {
    const auto& ix = idx.indices();
    double w;
    if (ix[0] == ix[2])
      w = 1.0;  // all three equal
    else if (ix[0] == ix[1] || ix[1] == ix[2])
      w = 3.0;  // one pair
    else
      w = distinct_weight;  // all distinct
    penalty += w * v * v;
  }
  return gaussian_entropy(Gamma) - penalty / 12.0;
}

// ---------------------------------------------------------------------------
// joint tail probability

namespace {
double tail_integral(const EllipticalCgf& sub, const Eigen::VectorXd& lo,
                     double z_mult, int nodes) {
  const int k = sub.dimension();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(k);
  const Eigen::MatrixXd H0 = sub.hessian(zero);

  std::vector<double> gl_x, gl_w;
  gauss_legendre(nodes, gl_x, gl_w);

  Eigen::VectorXd hi(k);
  for (int j = 0; j < k; ++j) {
    const double sigma = std::sqrt(H0(j, j));
    hi[j] = std::max(sub.m()[j], lo[j]) + z_mult * sigma;
    if (!(hi[j] > lo[j]))
      throw InputError("tail_prob_marginal: threshold beyond the upper box");
  }

  // Per-axis affine maps of the shared [-1, 1] rule.
  std::vector<std::vector<double>> axis_x(k), axis_w(k);
  for (int j = 0; j < k; ++j) {
    const double c = 0.5 * (hi[j] + lo[j]);
    const double h = 0.5 * (hi[j] - lo[j]);
    axis_x[j].resize(nodes);
    axis_w[j].resize(nodes);
    for (int i = 0; i < nodes; ++i) {
      axis_x[j][i] = c + h * gl_x[i];
      axis_w[j][i] = h * gl_w[i];
    }
  }

  KahanSum total;
  std::vector<int> ix(k, 0);
  Eigen::VectorXd x(k);
  bool have_warm = false;
  Eigen::VectorXd warm;
  for (;;) {
    for (int j = 0; j < k; ++j) x[j] = axis_x[j][ix[j]];
    const SaddlepointSolution sol =
        solve_saddlepoint_impl(sub, x, have_warm ? &warm : nullptr);
    warm = sol.s;
    have_warm = true;
    double w = saddlepoint_density(sol, x);
    for (int j = 0; j < k; ++j) w *= axis_w[j][ix[j]];
    total.add(w);

    int j = k - 1;
    while (j >= 0 && ++ix[j] == nodes) ix[j--] = 0;
    if (j < 0) break;
    // Warm starts only help along the fastest axis; reset on outer rollover.
    if (j != k - 1) have_warm = false;
  }
  return total.value();
}

int tail_nodes_for(int dim) {
  switch (dim) {
    case 1: return 64;
    case 2: return 48;
    case 3: return 24;
    case 4: return 14;
    default: return 10;
  }
}
}  // namespace

TailProbResult tail_prob_marginal(const EllipticalCgf& model,
                                  const std::vector<int>& subset,
                                  const Eigen::VectorXd& thresholds) {
  if (subset.size() < 1 || subset.size() > 5)
    throw InputError("tail_prob_marginal: subset size must be in [1, 5]");
  if (thresholds.size() != static_cast<Eigen::Index>(subset.size()))
    throw InputError("tail_prob_marginal: thresholds size mismatch");
  check_finite_point(thresholds, "tail_prob_marginal");

  const EllipticalCgf sub = model.marginal(subset);
  const int nodes = tail_nodes_for(sub.dimension());
  const double coarse = tail_integral(sub, thresholds, 12.0, nodes);
  const double fine =
      tail_integral(sub, thresholds, 15.0, nodes + (nodes + 1) / 2);
  TailProbResult result;
  result.value = fine;
  result.error_estimate = std::abs(fine - coarse);
  return result;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rule

void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (n < 1) throw InputError("gauss_legendre: n must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[n - 1 - i] = weights[i];
  }
}

}  // namespace cgflab
