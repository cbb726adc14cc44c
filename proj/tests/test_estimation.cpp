#include <doctest.h>

#include <cmath>

#include "cgflab/cgf_model.hpp"
#include "cgflab/errors.hpp"
#include "cgflab/estimation.hpp"
#include "cgflab/rng.hpp"
#include "support/oracles.hpp"

using namespace cgflab;
using doctest::Approx;

namespace {

Eigen::MatrixXd correlated_normal(int n, double rho, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd data(n, 2);
  const double s = std::sqrt(1.0 - rho * rho);
  for (int i = 0; i < n; ++i) {
    const double z1 = rng.normal(), z2 = rng.normal();
    data(i, 0) = z1;
    data(i, 1) = rho * z1 + s * z2;
  }
  return data;
}

}  // namespace

TEST_CASE("kendall tau: perfect concordance and discordance") {
  Eigen::VectorXd x(5);
  x << 1, 2, 3, 4, 5;
  CHECK(kendall_tau(x, x) == Approx(1.0));
  CHECK(kendall_tau(x, -x) == Approx(-1.0));
}

TEST_CASE("kendall tau: one discordant pair out of three") {
  Eigen::VectorXd x(3), y(3);
  x << 1, 2, 3;
  y << 1, 3, 2;
  CHECK(kendall_tau(x, y) == Approx(1.0 / 3.0));
}

TEST_CASE("kendall tau: tie-corrected agreement with pair counting") {
  Rng rng(83);

  SUBCASE("continuous data") {
    const int n = 500;
    Eigen::VectorXd x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.normal();
      y[i] = 0.4 * x[i] + rng.normal();
    }
    CHECK(kendall_tau(x, y) ==
          Approx(testsup::naive_kendall(x, y)).epsilon(1e-12));
  }

  SUBCASE("heavily tied data") {
    const int n = 400;
    Eigen::VectorXd x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = std::floor(10.0 * rng.uniform());
      y[i] = std::floor(6.0 * rng.uniform()) + (rng.uniform() < 0.3 ? x[i] : 0);
    }
    CHECK(kendall_tau(x, y) ==
          Approx(testsup::naive_kendall(x, y)).epsilon(1e-12));
  }

  SUBCASE("short series and guards") {
    Eigen::VectorXd x(2), y(2), c(3), d(3);
    x << 1, 2;
    y << 5, 3;
    CHECK(kendall_tau(x, y) == Approx(-1.0));
    c << 1, 1, 1;
    d << 1, 2, 3;
    CHECK_THROWS_AS(kendall_tau(c, d), InputError);
    CHECK_THROWS_AS(kendall_tau(d, c), InputError);
    Eigen::VectorXd e(2);
    e << 1, 2;
    CHECK_THROWS_AS(kendall_tau(e, d), InputError);
  }
}

TEST_CASE("covariance estimate: independent columns stay near diagonal") {
  Rng rng(89);
  const int n = 4000;
  Eigen::MatrixXd data(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) data(i, j) = rng.normal();
  const CovarianceEstimate est = estimate_covariance(data);
  for (int i = 0; i < 3; ++i) {
    CHECK(est.correlation(i, i) == 1.0);
    for (int j = i + 1; j < 3; ++j)
      CHECK(std::abs(est.correlation(i, j)) < 3.0 / std::sqrt(n));
  }
  CHECK_FALSE(est.psd_projected);
  CHECK(est.psd_adjustment == 0.0);
}

TEST_CASE("covariance estimate: elliptical consistency at rho = 0.5") {
  const Eigen::MatrixXd data = correlated_normal(10000, 0.5, 97);
  const CovarianceEstimate est = estimate_covariance(data);
  CHECK(est.correlation(0, 1) == Approx(0.5).epsilon(0.04));
  CHECK(std::abs(est.correlation(0, 1) - 0.5) < 0.02);
  // Gamma rescales by the plug-in standard deviations.
  const double v0 =
      (data.col(0).array() - data.col(0).mean()).square().mean();
  const double v1 =
      (data.col(1).array() - data.col(1).mean()).square().mean();
  CHECK(est.Gamma(0, 0) == Approx(v0).epsilon(1e-10));
  CHECK(est.Gamma(1, 1) == Approx(v1).epsilon(1e-10));
  CHECK(est.Gamma(0, 1) ==
        Approx(est.correlation(0, 1) * std::sqrt(v0 * v1)).epsilon(1e-10));
}

TEST_CASE("covariance estimate: duplicated column") {
  Rng rng(101);
  const int n = 200;
  Eigen::MatrixXd data(n, 3);
  for (int i = 0; i < n; ++i) {
    data(i, 0) = rng.normal();
    data(i, 1) = data(i, 0);
    data(i, 2) = rng.normal();
  }
  const CovarianceEstimate est = estimate_covariance(data);
  CHECK(est.correlation(0, 1) == Approx(1.0));
  CHECK(est.Gamma(0, 0) == Approx(est.Gamma(1, 1)));
}

TEST_CASE("covariance estimate: guards name the offending column") {
  Eigen::MatrixXd small(5, 2);
  small.setRandom();
  CHECK_THROWS_AS(estimate_covariance(small), InputError);

  Eigen::MatrixXd data(50, 3);
  data.setRandom();
  data.col(1).setConstant(2.0);
  try {
    estimate_covariance(data);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("covariance estimate: rank correlation is transform invariant") {
  Rng rng(103);
  const int n = 300;
  Eigen::MatrixXd data(n, 3);
  for (int i = 0; i < n; ++i) {
    const double shared = rng.normal();
    for (int j = 0; j < 3; ++j) data(i, j) = shared + rng.normal();
  }
  Eigen::MatrixXd warped = data;
  warped.col(0) = warped.col(0).array().exp();
  warped.col(2) = (2.0 * warped.col(2)).array().exp();

  const CovarianceEstimate a = estimate_covariance(data);
  const CovarianceEstimate b = estimate_covariance(warped);
  // Strictly increasing marginal transforms leave Kendall's tau, and hence
  // the sin-transformed correlation, unchanged.
  CHECK((a.correlation - b.correlation).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("coefficient recovery: reference fixture within print rounding") {
  const Eigen::MatrixXd g = testsup::reference_scale_matrix();
  const Eigen::VectorXd c = fit_coefficients(
      g, testsup::reference_sum_cumulants(), {2, 4, 6});
  const std::vector<double> expected = testsup::reference_coefficients();
  REQUIRE(c.size() == 3);
  for (int r = 0; r < 3; ++r) {
    CAPTURE(r);
    CHECK(testsup::rel_err(c[r], expected[r]) < 0.03);
  }
}

TEST_CASE("coefficient recovery: hand-checkable inversion") {
  Eigen::MatrixXd g(2, 2);
  g << 1.0, 0.0, 0.0, 1.0;  // T = 2
  const Eigen::VectorXd c = fit_coefficients(g, {2.0}, {2});
  REQUIRE(c.size() == 1);
  CHECK(c[0] == Approx(1.0).epsilon(1e-14));

  // Near-Gaussian: vanishing fourth sum cumulant drives c2 to zero.
  const Eigen::VectorXd c2 = fit_coefficients(g, {2.0, 1e-9}, {2, 4});
  CHECK(std::abs(c2[1]) < 1e-9);
}

TEST_CASE("coefficient recovery: round trip through analytic sum cumulants") {
  const Eigen::MatrixXd g = testsup::reference_scale_matrix();
  Eigen::VectorXd c(3);
  c << 0.999, 0.1101, 0.1332;
  const EllipticalCgf model(Eigen::VectorXd::Zero(8), g, c);
  std::vector<int> all{0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<double> kappas;
  std::vector<int> orders;
  for (int r = 1; r <= 3; ++r) {
    orders.push_back(2 * r);
    kappas.push_back(sum_cumulants(model, all, 2 * r));
  }
  const Eigen::VectorXd back = fit_coefficients(g, kappas, orders);
  for (int r = 0; r < 3; ++r)
    CHECK(testsup::rel_err(back[r], c[r]) <= 1e-12);
}

TEST_CASE("coefficient recovery: guards") {
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(fit_coefficients(zero, {1.0}, {2}), InputError);
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(fit_coefficients(g, {1.0, 2.0}, {2}), InputError);
  CHECK_THROWS_AS(fit_coefficients(g, {1.0, 2.0}, {2, 3}), InputError);
  CHECK_THROWS_AS(fit_coefficients(g, {1.0, 2.0}, {4, 6}), InputError);
}

TEST_CASE("gamma mixture: moments and cumulants of simple mixtures") {
  GammaMixture one;
  one.weights = {1.0};
  one.shapes = {2.0};
  one.scales = {0.5};
  one.validate();
  CHECK(one.moment(1) == Approx(1.0));
  CHECK(one.cumulant(1) == Approx(1.0));
  CHECK(one.cumulant(2) == Approx(0.5));   // k theta^2
  CHECK(one.cumulant(3) == Approx(0.5));   // 2 k theta^3

  const GammaMixture point = GammaMixture::point_mass(1.5);
  CHECK(point.degenerate);
  CHECK(point.moment(2) == Approx(2.25));
  CHECK(point.cumulant(1) == Approx(1.5));
  CHECK(point.cumulant(2) == Approx(0.0));
  CHECK(point.cumulant(4) == Approx(0.0));

  GammaMixture bad;
  bad.weights = {0.5, 0.4};
  bad.shapes = {1.0, 1.0};
  bad.scales = {1.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("gamma mixture fit: single-moment target") {
  const GammaMixture mix = fit_gamma_mixture({1.0}, 1);
  REQUIRE(mix.component_count() == 1);
  CHECK(mix.shapes[0] * mix.scales[0] == Approx(1.0).epsilon(1e-10));
  CHECK(mix.fit_residual <= 1e-10);
}

TEST_CASE("gamma mixture fit: exact single-component recovery") {
  // Targets are the first three cumulants of gamma(shape 2, scale 0.5).
  const GammaMixture mix = fit_gamma_mixture({1.0, 0.5, 0.5}, 1);
  for (int r = 1; r <= 3; ++r) {
    CAPTURE(r);
    CHECK(std::abs(mix.cumulant(r) - (r == 1 ? 1.0 : 0.5)) <= 1e-10);
  }
}

TEST_CASE("gamma mixture fit: reference coefficients with five components") {
  const GammaMixture mix =
      fit_gamma_mixture(testsup::reference_coefficients(), 5);
  CHECK(mix.fit_residual <= 1e-4);
  const std::vector<double> targets = testsup::reference_coefficients();
  for (int r = 1; r <= 3; ++r) {
    CAPTURE(r);
    CHECK(testsup::rel_err(mix.cumulant(r), targets[r - 1]) <= 2e-4);
  }
}

TEST_CASE("gamma mixture fit: unrealizable targets fail with a residual") {
  try {
    fit_gamma_mixture({1.0, -0.5}, 3);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(e.best_residual() > 1e-3);
  }
  CHECK_THROWS_AS(fit_gamma_mixture({}, 1), InputError);
  CHECK_THROWS_AS(fit_gamma_mixture({1.0}, 0), InputError);
}

TEST_CASE("powered exponential covariance") {
  PoweredExpParams p;
  p.sigma0_sq = 0.3;
  p.sigma1_sq = 2.0;
  p.theta1 = 1.5;
  p.theta2 = 1.0;
  CHECK(powered_exp_cov(0.0, p) == Approx(2.3));
  CHECK(powered_exp_cov(1.5, p) == Approx(2.0 / std::numbers::e));

  // Non-increasing away from the origin.
  double previous = powered_exp_cov(1e-9, p);
  for (double d = 0.1; d <= 10.0; d += 0.1) {
    const double v = powered_exp_cov(d, p);
    CHECK(v <= previous + 1e-15);
    previous = v;
  }

  PoweredExpParams bad = p;
  bad.theta2 = 2.5;
  CHECK_THROWS_AS(powered_exp_cov(1.0, bad), InputError);
  bad = p;
  bad.theta1 = 0.0;
  CHECK_THROWS_AS(powered_exp_cov(1.0, bad), InputError);
}

TEST_CASE("location matrix from the powered exponential family") {
  Rng rng(107);
  std::vector<std::array<double, 2>> pts;
  for (int i = 0; i < 20; ++i)
    pts.push_back({10.0 * rng.uniform(), 10.0 * rng.uniform()});
  PoweredExpParams p;
  p.sigma0_sq = 0.1;
  p.sigma1_sq = 1.0;
  p.theta1 = 2.0;
  p.theta2 = 2.0;  // Gaussian kernel: PSD for planar locations
  const Eigen::MatrixXd g = build_gamma(pts, p);
  REQUIRE(g.rows() == 20);
  CHECK((g - g.transpose()).norm() == 0.0);
  for (int i = 0; i < 20; ++i) CHECK(g(i, i) == Approx(1.1));
  const double dx = pts[0][0] - pts[1][0], dy = pts[0][1] - pts[1][1];
  const double d01 = std::sqrt(dx * dx + dy * dy);
  CHECK(g(0, 1) == Approx(powered_exp_cov(d01, p)));
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}
