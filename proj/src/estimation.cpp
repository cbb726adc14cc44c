#include "cgflab/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cgflab/cumulants.hpp"
#include "cgflab/errors.hpp"
#include "cgflab/parallel.hpp"
#include "cgflab/rng.hpp"

namespace cgflab {

namespace {

double double_factorial_odd(int r) {
  double v = 1.0;
  for (int k = 3; k <= 2 * r - 1; k += 2) v *= k;
  return v;
}

// Pairs tied within runs of equal values: sum over runs of t(t-1)/2.
long long tie_pairs(const std::vector<double>& sorted) {
  long long total = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const long long t = static_cast<long long>(j - i);
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

// Merge sort counting inversions (strictly descending pairs); ties are not
// counted because the merge is stable and takes the left side on equality.
long long sort_count_inversions(std::vector<double>& v,
                                std::vector<double>& tmp, std::size_t lo,
                                std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long count = sort_count_inversions(v, tmp, lo, mid) +
                    sort_count_inversions(v, tmp, mid, hi);
  std::size_t a = lo, b = mid, out = lo;
  while (a < mid && b < hi) {
    if (v[b] < v[a]) {
      count += static_cast<long long>(mid - a);
      tmp[out++] = v[b++];
    } else {
      tmp[out++] = v[a++];
    }
  }
  while (a < mid) tmp[out++] = v[a++];
  while (b < hi) tmp[out++] = v[b++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
  return count;
}

}  // namespace

// ---------------------------------------------------------------------------
// gamma mixture

void GammaMixture::validate() const {
  if (degenerate) {
    if (!weights.empty() || !shapes.empty() || !scales.empty())
      throw InputError("GammaMixture: point mass must have no components");
    if (!std::isfinite(point))
      throw InputError("GammaMixture: non-finite point mass");
    return;
  }
  const std::size_t M = weights.size();
  if (M == 0) throw InputError("GammaMixture: no components");
  if (shapes.size() != M || scales.size() != M)
    throw InputError("GammaMixture: component arrays differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    if (!(weights[i] > 0.0))
      throw InputError("GammaMixture: weights must be positive");
    if (!(shapes[i] > 0.0) || !(scales[i] > 0.0))
      throw InputError("GammaMixture: shapes and scales must be positive");
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw InputError("GammaMixture: weights sum to " + std::to_string(sum));
}

double GammaMixture::moment(int r) const {
  if (r < 1 || r > kMaxCumulantOrder)
    throw InputError("GammaMixture::moment: order out of range");
  if (degenerate) return std::pow(point, r);
  double m = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double rising = 1.0;  // shape (shape+1) ... (shape+r-1)
    for (int t = 0; t < r; ++t) rising *= shapes[i] + static_cast<double>(t);
    m += weights[i] * rising * std::pow(scales[i], r);
  }
  return m;
}

double GammaMixture::cumulant(int r) const {
  if (r < 1 || r > kMaxCumulantOrder)
    throw InputError("GammaMixture::cumulant: order out of range");
  if (degenerate) return r == 1 ? point : 0.0;
  MomentSet moments(1);
  for (int j = 1; j <= r; ++j)
    moments.set(MultiIndex::repeated(0, j), moment(j));
  return cumulant_from_moments(moments, MultiIndex::repeated(0, r));
}

GammaMixture GammaMixture::point_mass(double value) {
  GammaMixture mix;
  mix.degenerate = true;
  mix.point = value;
  mix.validate();
  return mix;
}

// ---------------------------------------------------------------------------
// Kendall tau

double kendall_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const std::size_t n = static_cast<std::size_t>(x.size());
  if (y.size() != x.size()) throw InputError("kendall_tau: length mismatch");
  if (n < 2) throw InputError("kendall_tau: need at least 2 observations");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  // Tie counts: n1 pairs tied in x, n3 pairs tied in both.
  long long n1 = 0, n3 = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i + 1;
      while (j < n && x[order[j]] == x[order[i]]) ++j;
      const long long t = static_cast<long long>(j - i);
      n1 += t * (t - 1) / 2;
      std::size_t a = i;
      while (a < j) {
        std::size_t b = a + 1;
        while (b < j && y[order[b]] == y[order[a]]) ++b;
        const long long u = static_cast<long long>(b - a);
        n3 += u * (u - 1) / 2;
        a = b;
      }
      i = j;
    }
  }

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::vector<double> tmp(n);
  const long long swaps = sort_count_inversions(ys, tmp, 0, n);
  const long long n2 = tie_pairs(ys);  // ys is now fully sorted

  const long long n0 = static_cast<long long>(n) * (n - 1) / 2;
  const long long numerator = n0 - n1 - n2 + n3 - 2 * swaps;
  const double den_x = static_cast<double>(n0 - n1);
  const double den_y = static_cast<double>(n0 - n2);
  if (den_x <= 0.0 || den_y <= 0.0)
    throw InputError("kendall_tau: tau-b undefined for constant input");
  const double tau = static_cast<double>(numerator) / std::sqrt(den_x * den_y);
  return std::clamp(tau, -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// covariance estimation

CovarianceEstimate estimate_covariance(const Eigen::MatrixXd& data) {
  const Eigen::Index n = data.rows();
  const Eigen::Index J = data.cols();
  if (n < 10) throw InputError("estimate_covariance: need at least 10 rows");
  if (J < 1) throw InputError("estimate_covariance: no columns");

  Eigen::VectorXd sd(J);
  for (Eigen::Index j = 0; j < J; ++j) {
    const double lo = data.col(j).minCoeff();
    const double hi = data.col(j).maxCoeff();
    if (lo == hi)
      throw InputError("estimate_covariance: column " + std::to_string(j) +
                       " is constant");
    const double mean = data.col(j).mean();
    sd[j] = std::sqrt((data.col(j).array() - mean).square().sum() /
                      static_cast<double>(n));
  }

  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(J, J);
  constexpr double kHalfPi = 1.5707963267948966192313217;
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < J; ++a)
    for (int b = a + 1; b < J; ++b) pairs.emplace_back(a, b);
  std::vector<double> rho(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [a, b] = pairs[k];
    rho[k] = std::sin(kHalfPi * kendall_tau(data.col(a), data.col(b)));
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    R(pairs[k].first, pairs[k].second) = rho[k];
    R(pairs[k].second, pairs[k].first) = rho[k];
  }

  CovarianceEstimate est;
  est.correlation = R;
  est.Gamma = sd.asDiagonal() * R * sd.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(est.Gamma);
  const double min_eig = es.eigenvalues().minCoeff();
  const double max_abs = es.eigenvalues().cwiseAbs().maxCoeff();
  if (min_eig < 0.0) {
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd fixed = es.eigenvectors() * clipped.asDiagonal() *
                            es.eigenvectors().transpose();
    fixed = 0.5 * (fixed + fixed.transpose());
    est.psd_adjustment = (fixed - est.Gamma).norm();
    est.psd_projected = min_eig < -1e-12 * std::max(max_abs, 1e-300);
    est.Gamma = fixed;
  }
  return est;
}

Eigen::VectorXd fit_coefficients(const Eigen::MatrixXd& Gamma,
                                 const std::vector<double>& sum_cumulant_values,
                                 const std::vector<int>& orders) {
  if (orders.empty() || orders.size() != sum_cumulant_values.size())
    throw InputError("fit_coefficients: orders and values must match");
  for (std::size_t k = 0; k < orders.size(); ++k)
    if (orders[k] != 2 * static_cast<int>(k) + 2)
      throw InputError(
          "fit_coefficients: orders must be the consecutive even orders "
          "2, 4, ..., 2R");
  if (Gamma.rows() != Gamma.cols() || Gamma.rows() < 1)
    throw InputError("fit_coefficients: Gamma must be square");
  const double T = Gamma.sum();
  if (!(T > 0.0))
    throw InputError("fit_coefficients: total sum of Gamma must be positive");

  Eigen::VectorXd coeffs(orders.size());
  double Tr = 1.0;
  for (std::size_t k = 0; k < orders.size(); ++k) {
    const int r = static_cast<int>(k) + 1;
    Tr *= T;
    coeffs[k] = sum_cumulant_values[k] / (double_factorial_odd(r) * Tr);
  }
  return coeffs;
}

// ---------------------------------------------------------------------------
// gamma mixture fitting

namespace {

struct MixtureParams {
  // 3M free parameters: logits, log shapes, log scales.
  Eigen::VectorXd theta;
  int M;

  GammaMixture to_mixture() const {
    GammaMixture mix;
    double zmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < M; ++i) zmax = std::max(zmax, theta[i]);
    double zsum = 0.0;
    for (int i = 0; i < M; ++i) zsum += std::exp(theta[i] - zmax);
    for (int i = 0; i < M; ++i) {
      mix.weights.push_back(std::exp(theta[i] - zmax) / zsum);
      mix.shapes.push_back(std::exp(theta[M + i]));
      mix.scales.push_back(std::exp(theta[2 * M + i]));
    }
    return mix;
  }
};

Eigen::VectorXd mixture_residual(const MixtureParams& p,
                                 const std::vector<double>& targets) {
  const GammaMixture mix = p.to_mixture();
  const int R = static_cast<int>(targets.size());
  Eigen::VectorXd res(R);
  for (int r = 1; r <= R; ++r) {
    const double scale = std::max(std::abs(targets[r - 1]), 1e-8);
    res[r - 1] = (mix.cumulant(r) - targets[r - 1]) / scale;
  }
  return res;
}

// Plain Levenberg-Marquardt with forward-difference Jacobian.
double levenberg_marquardt(MixtureParams& p,
                           const std::vector<double>& targets) {
  const int dim = static_cast<int>(p.theta.size());
  Eigen::VectorXd res = mixture_residual(p, targets);
  double cost = 0.5 * res.squaredNorm();
  double lambda = 1e-3;
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::MatrixXd Jac(res.size(), dim);
    for (int j = 0; j < dim; ++j) {
      const double h = 1e-6 * (1.0 + std::abs(p.theta[j]));
      MixtureParams q = p;
      q.theta[j] += h;
      Jac.col(j) = (mixture_residual(q, targets) - res) / h;
    }
    const Eigen::MatrixXd JtJ = Jac.transpose() * Jac;
    const Eigen::VectorXd Jtr = Jac.transpose() * res;
    if (Jtr.lpNorm<Eigen::Infinity>() < 1e-14) break;

    bool stepped = false;
    for (int tries = 0; tries < 12 && !stepped; ++tries) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal().array() += lambda;
      const Eigen::VectorXd step = A.ldlt().solve(Jtr);
      MixtureParams q = p;
      q.theta -= step;
      const Eigen::VectorXd res_q = mixture_residual(q, targets);
      const double cost_q = 0.5 * res_q.squaredNorm();
      if (std::isfinite(cost_q) && cost_q < cost) {
        const double drop = cost - cost_q;
        p = q;
        res = res_q;
        cost = cost_q;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (drop < 1e-16 * (1.0 + cost)) return cost;
      } else {
        lambda *= 10.0;
      }
    }
    if (!stepped) break;
    if (cost < 1e-28) break;
  }
  return cost;
}

}  // namespace

GammaMixture fit_gamma_mixture(const std::vector<double>& targets,
                               int n_components) {
  const int R = static_cast<int>(targets.size());
  if (R < 1) throw InputError("fit_gamma_mixture: no targets");
  if (R > kMaxCumulantOrder)
    throw InputError("fit_gamma_mixture: at most " +
                     std::to_string(kMaxCumulantOrder) + " targets");
  for (double t : targets)
    if (!std::isfinite(t))
      throw InputError("fit_gamma_mixture: non-finite target");
  if (n_components < 1 || n_components > 16)
    throw InputError("fit_gamma_mixture: components must be in [1, 16]");

  const int M = n_components;
  constexpr int kStarts = 16;
  const double mean_scale = std::max(std::abs(targets[0]), 1e-2);

  std::vector<MixtureParams> fits(kStarts);
  std::vector<double> max_rel(kStarts,
                              std::numeric_limits<double>::infinity());
  parallel_for(kStarts, [&](std::size_t s) {
    Rng rng(0x5E11AB5EED5ULL, s);
    MixtureParams p;
    p.M = M;
    p.theta.resize(3 * M);
    for (int i = 0; i < M; ++i) {
      p.theta[i] = 0.5 * rng.normal();                      // logits
      const double logk = 0.5 + 1.0 * rng.normal();         // log shape
      p.theta[M + i] = logk;
      p.theta[2 * M + i] =
          std::log(mean_scale) - logk + 0.8 * rng.normal();  // log scale
    }
    levenberg_marquardt(p, targets);
    max_rel[s] = mixture_residual(p, targets).lpNorm<Eigen::Infinity>();
    fits[s] = p;
  });

  std::size_t best = 0;
  for (std::size_t s = 1; s < kStarts; ++s)
    if (max_rel[s] < max_rel[best]) best = s;

  if (!(max_rel[best] <= 1e-3))
    throw FitError("fit_gamma_mixture: best residual " +
                       std::to_string(max_rel[best]) +
                       " exceeds 1e-3; targets are likely not realizable",
                   max_rel[best]);

  GammaMixture mix = fits[best].to_mixture();
  mix.fit_residual = max_rel[best];

  // Canonical component order: descending weight, shape breaking ties.
  std::vector<int> order(M);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (mix.weights[a] != mix.weights[b])
      return mix.weights[a] > mix.weights[b];
    return mix.shapes[a] < mix.shapes[b];
  });
  GammaMixture sorted;
  sorted.fit_residual = mix.fit_residual;
  for (int i : order) {
    sorted.weights.push_back(mix.weights[i]);
    sorted.shapes.push_back(mix.shapes[i]);
    sorted.scales.push_back(mix.scales[i]);
  }
  // Make the weight sum exact so downstream validation never trips over
  // accumulated rounding in the softmax.
  double wsum = 0.0;
  for (double w : sorted.weights) wsum += w;
  for (double& w : sorted.weights) w /= wsum;
  sorted.validate();
  return sorted;
}

// ---------------------------------------------------------------------------
// powered exponential covariance

double powered_exp_cov(double distance, const PoweredExpParams& params) {
  if (!(distance >= 0.0))
    throw InputError("powered_exp_cov: distance must be >= 0");
  if (params.sigma0_sq < 0.0 || params.sigma1_sq < 0.0)
    throw InputError("powered_exp_cov: variances must be >= 0");
  if (!(params.theta1 > 0.0))
    throw InputError("powered_exp_cov: theta1 must be > 0");
  if (!(params.theta2 > 0.0) || params.theta2 > 2.0)
    throw InputError("powered_exp_cov: theta2 must be in (0, 2]");
  if (distance == 0.0) return params.sigma0_sq + params.sigma1_sq;
  return params.sigma1_sq *
         std::exp(-std::pow(distance / params.theta1, params.theta2));
}

Eigen::MatrixXd build_gamma(const std::vector<std::array<double, 2>>& locations,
                            const PoweredExpParams& params) {
  const int J = static_cast<int>(locations.size());
  if (J < 1) throw InputError("build_gamma: no locations");
  Eigen::MatrixXd Gamma(J, J);
  for (int i = 0; i < J; ++i)
    for (int j = i; j < J; ++j) {
      const double dx = locations[i][0] - locations[j][0];
      const double dy = locations[i][1] - locations[j][1];
      const double d = std::hypot(dx, dy);
      const double v = powered_exp_cov(d, params);
      Gamma(i, j) = v;
      Gamma(j, i) = v;
    }
  return Gamma;
}

}  // namespace cgflab
