#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace cgflab {

// Multivariate cumulant generating function with exact derivatives.
class CgfOracle {
 public:
  virtual ~CgfOracle() = default;
  virtual int dimension() const = 0;
  virtual double value(const Eigen::VectorXd& s) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& s) const = 0;
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& s) const = 0;
};

// Univariate cumulant generating function.  cumulant_at_zero supplies the
// low-order cumulants used by tail expansions near the mean; the default
// differentiates d2 numerically, concrete families override analytically.
class UnivariateCgf {
 public:
  virtual ~UnivariateCgf() = default;
  virtual double value(double t) const = 0;
  virtual double d1(double t) const = 0;
  virtual double d2(double t) const = 0;
  // r in [1, 5].
  virtual double cumulant_at_zero(int r) const;
};

class GaussianCgf : public UnivariateCgf {
 public:
  GaussianCgf(double mean, double variance);
  double value(double t) const override;
  double d1(double t) const override;
  double d2(double t) const override;
  double cumulant_at_zero(int r) const override;

 private:
  double mean_, variance_;
};

// K(t) = -shape * log(1 - scale * t) for t < 1/scale; +infinity outside.
class GammaCgf : public UnivariateCgf {
 public:
  GammaCgf(double shape, double scale);
  double value(double t) const override;
  double d1(double t) const override;
  double d2(double t) const override;
  double cumulant_at_zero(int r) const override;

 private:
  double shape_, scale_;
};

// Elliptical CGF family
//   K(s) = m's + sum_{r=1}^{R} (c_r / r!) q(s)^r,   q(s) = s' Gamma s / 2.
// Gamma must be symmetric PSD; coefficient realizability is checked
// separately by validate_model.
class EllipticalCgf : public CgfOracle {
 public:
  EllipticalCgf(Eigen::VectorXd m, Eigen::MatrixXd Gamma,
                Eigen::VectorXd coeffs);

  int dimension() const override { return static_cast<int>(m_.size()); }
  int coefficient_count() const { return static_cast<int>(coeffs_.size()); }
  const Eigen::VectorXd& m() const { return m_; }
  const Eigen::MatrixXd& Gamma() const { return Gamma_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }

  double value(const Eigen::VectorXd& s) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& s) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& s) const override;

  // Marginal model of a sorted distinct subset of coordinates (same family,
  // restricted m and Gamma, identical coefficients).
  EllipticalCgf marginal(const std::vector<int>& subset) const;

 private:
  Eigen::VectorXd m_;
  Eigen::MatrixXd Gamma_;
  Eigen::VectorXd coeffs_;
};

// Disjoint groups of coordinate indices (a partial partition of {0..J-1}).
class AggregationMap {
 public:
  AggregationMap(int dimension, std::vector<std::vector<int>> groups);

  int dimension() const { return dimension_; }
  int group_count() const { return static_cast<int>(groups_.size()); }
  const std::vector<std::vector<int>>& groups() const { return groups_; }

  // J x l selection matrix G with G(j, g) = 1 iff j belongs to group g.
  Eigen::MatrixXd selection_matrix() const;

 private:
  int dimension_;
  std::vector<std::vector<int>> groups_;
};

// CGF of the aggregated vector xi = G'X: K_xi(t) = K_X(G t).
class AggregatedCgf : public CgfOracle {
 public:
  AggregatedCgf(EllipticalCgf model, AggregationMap map);

  int dimension() const override { return map_.group_count(); }
  double value(const Eigen::VectorXd& t) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& t) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& t) const override;

  const EllipticalCgf& model() const { return model_; }
  const AggregationMap& map() const { return map_; }

 private:
  EllipticalCgf model_;
  AggregationMap map_;
  Eigen::MatrixXd G_;
};

AggregatedCgf aggregate_cgf(const EllipticalCgf& model,
                            const AggregationMap& map);

// Univariate CGF of S = sum_{j in subset} X_j with analytic derivatives
// and exact low-order cumulants.
class SumCgf : public UnivariateCgf {
 public:
  SumCgf(const EllipticalCgf& model, const std::vector<int>& subset);

  double value(double t) const override;
  double d1(double t) const override;
  double d2(double t) const override;
  double cumulant_at_zero(int r) const override;

  double block_sum() const { return T_; }

 private:
  double M_;  // sum of means
  double T_;  // sum of Gamma over the subset block
  Eigen::VectorXd coeffs_;
};

// Order-r cumulant of the subset sum.  Order 1 gives the sum of means;
// odd orders above 1 vanish; even order 2r requires r <= R and equals
// (2r - 1)!! c_r T^r with T the block sum of Gamma over the subset.
double sum_cumulants(const EllipticalCgf& model, const std::vector<int>& subset,
                     int order);

// Derived-versus-printed toggle for the closed-form group formulas.  The
// kCgfDerived forms follow from differentiating the aggregated CGF and
// match Monte Carlo; kAlternate reproduces a variant that appears in some
// references (off-diagonal covariance halved, even cumulants scaled by
// (2r-1)! instead of (2r-1)!!) and is retained for comparison only.
enum class GroupFormula { kCgfDerived, kAlternate };

// l x l covariance of the aggregated vector: cov(Z_a, Z_b) = c_1 * S_ab,
// S_ab the Gamma block sum over groups a and b.
Eigen::MatrixXd group_cov(const EllipticalCgf& model, const AggregationMap& map,
                          GroupFormula formula = GroupFormula::kCgfDerived);

// Per-group order-r cumulants of the aggregated vector.
Eigen::VectorXd group_cumulants(const EllipticalCgf& model,
                                const AggregationMap& map, int order,
                                GroupFormula formula = GroupFormula::kCgfDerived);

struct ValidityReport {
  bool gamma_symmetric = false;
  bool gamma_psd = false;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  bool coeffs_realizable = false;
  double mixture_residual = 0.0;
  std::vector<std::string> messages;

  bool ok() const { return gamma_symmetric && gamma_psd && coeffs_realizable; }
};

// Structural validity: Gamma symmetric PSD within tolerance, coefficients
// realizable as even cumulants of a scale mixture (checked by attempting a
// gamma-mixture fit with the given component count).
ValidityReport validate_model(const EllipticalCgf& model,
                              int mixture_components = 5);

// Flat JSON document with fields m, Gamma (row-major), coeffs. Round-trips
// are bit-exact for finite values.
std::string model_to_json(const EllipticalCgf& model);
EllipticalCgf model_from_json(const std::string& text);

}  // namespace cgflab
