#include "cgflab/cgf_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "cgflab/errors.hpp"
#include "cgflab/estimation.hpp"

namespace cgflab {

namespace {
constexpr double kEigTol = 1e-10;  // relative PSD tolerance on Gamma

void check_gamma(const Eigen::VectorXd& m, const Eigen::MatrixXd& Gamma,
                 const Eigen::VectorXd& coeffs) {
  const int J = static_cast<int>(m.size());
  if (J < 1) throw InputError("EllipticalCgf: empty mean vector");
  if (Gamma.rows() != J || Gamma.cols() != J)
    throw InputError("EllipticalCgf: Gamma must be " + std::to_string(J) +
                     "x" + std::to_string(J));
  if (coeffs.size() < 1) throw InputError("EllipticalCgf: no coefficients");
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (!std::isfinite(m[i])) throw InputError("EllipticalCgf: non-finite m");
  for (Eigen::Index i = 0; i < coeffs.size(); ++i)
    if (!std::isfinite(coeffs[i]))
      throw InputError("EllipticalCgf: non-finite coefficient");
  const double scale = std::max(1.0, Gamma.cwiseAbs().maxCoeff());
  for (int i = 0; i < J; ++i)
    for (int j = 0; j < J; ++j) {
      if (!std::isfinite(Gamma(i, j)))
        throw InputError("EllipticalCgf: non-finite Gamma");
      if (std::abs(Gamma(i, j) - Gamma(j, i)) > 1e-10 * scale)
        throw InputError("EllipticalCgf: Gamma is not symmetric");
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gamma,
                                                    Eigen::EigenvaluesOnly);
  const double max_eig = es.eigenvalues().maxCoeff();
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -kEigTol * std::max(max_eig, 1e-300))
    throw InputError("EllipticalCgf: Gamma is not positive semidefinite");
}

void check_subset(int dimension, const std::vector<int>& subset,
                  const char* who) {
  if (subset.empty()) throw InputError(std::string(who) + ": empty subset");
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (subset[k] < 0 || subset[k] >= dimension)
      throw InputError(std::string(who) + ": index " +
                       std::to_string(subset[k]) + " out of range");
    if (k > 0 && subset[k] <= subset[k - 1])
      throw InputError(std::string(who) + ": subset must be sorted, distinct");
  }
}

double block_sum(const Eigen::MatrixXd& Gamma, const std::vector<int>& a,
                 const std::vector<int>& b) {
  double s = 0.0;
  for (int i : a)
    for (int j : b) s += Gamma(i, j);
  return s;
}

double double_factorial_odd(int r) {
  // (2r - 1)!! = 1 * 3 * ... * (2r - 1)
  double v = 1.0;
  for (int k = 3; k <= 2 * r - 1; k += 2) v *= k;
  return v;
}

double factorial(int n) {
  double v = 1.0;
  for (int k = 2; k <= n; ++k) v *= k;
  return v;
}
}  // namespace

// ---------------------------------------------------------------------------
// univariate oracles

double UnivariateCgf::cumulant_at_zero(int r) const {
  if (r < 1 || r > 5)
    throw InputError("cumulant_at_zero: order must be in [1, 5]");
  if (r == 1) return d1(0.0);
  if (r == 2) return d2(0.0);
  // Central differences of d2 with one Richardson step.
  const double h = std::pow(std::numeric_limits<double>::epsilon(), 0.2) *
                   (1.0 + std::abs(d2(0.0)));
  auto deriv = [&](int order, double step) {
    if (order == 1)  // d3 = (d2)'
      return (d2(step) - d2(-step)) / (2.0 * step);
    if (order == 2)  // d4 = (d2)''
      return (d2(step) - 2.0 * d2(0.0) + d2(-step)) / (step * step);
    // d5 = (d2)'''
    return (d2(2.0 * step) - 2.0 * d2(step) + 2.0 * d2(-step) -
            d2(-2.0 * step)) /
           (2.0 * step * step * step);
  };
  const int order = r - 2;
  const double coarse = deriv(order, h);
  const double fine = deriv(order, h / 2.0);
  const double pow4 = 4.0;  // both stencils are second order accurate
  return (pow4 * fine - coarse) / (pow4 - 1.0);
}

GaussianCgf::GaussianCgf(double mean, double variance)
    : mean_(mean), variance_(variance) {
  if (!(variance > 0.0)) throw InputError("GaussianCgf: variance must be > 0");
}

double GaussianCgf::value(double t) const {
  return mean_ * t + 0.5 * variance_ * t * t;
}
double GaussianCgf::d1(double t) const { return mean_ + variance_ * t; }
double GaussianCgf::d2(double) const { return variance_; }
double GaussianCgf::cumulant_at_zero(int r) const {
  if (r < 1 || r > 5)
    throw InputError("cumulant_at_zero: order must be in [1, 5]");
  if (r == 1) return mean_;
  if (r == 2) return variance_;
  return 0.0;
}

GammaCgf::GammaCgf(double shape, double scale) : shape_(shape), scale_(scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw InputError("GammaCgf: shape and scale must be > 0");
}

double GammaCgf::value(double t) const {
  if (t >= 1.0 / scale_) return std::numeric_limits<double>::infinity();
  return -shape_ * std::log1p(-scale_ * t);
}
double GammaCgf::d1(double t) const {
  if (t >= 1.0 / scale_) return std::numeric_limits<double>::infinity();
  return shape_ * scale_ / (1.0 - scale_ * t);
}
double GammaCgf::d2(double t) const {
  if (t >= 1.0 / scale_) return std::numeric_limits<double>::infinity();
  const double u = 1.0 - scale_ * t;
  return shape_ * scale_ * scale_ / (u * u);
}
double GammaCgf::cumulant_at_zero(int r) const {
  if (r < 1 || r > 5)
    throw InputError("cumulant_at_zero: order must be in [1, 5]");
  return shape_ * std::pow(scale_, r) * factorial(r - 1);
}

// ---------------------------------------------------------------------------
// elliptical family

EllipticalCgf::EllipticalCgf(Eigen::VectorXd m, Eigen::MatrixXd Gamma,
                             Eigen::VectorXd coeffs)
    : m_(std::move(m)), Gamma_(std::move(Gamma)), coeffs_(std::move(coeffs)) {
  check_gamma(m_, Gamma_, coeffs_);
}

double EllipticalCgf::value(const Eigen::VectorXd& s) const {
  if (s.size() != m_.size()) throw InputError("cgf value: wrong size");
  const double q = 0.5 * s.dot(Gamma_ * s);
  double sum = m_.dot(s);
  double p = 1.0;  // q^r / r!
  for (int r = 1; r <= coeffs_.size(); ++r) {
    p *= q / static_cast<double>(r);
    sum += coeffs_[r - 1] * p;
  }
  return sum;
}

Eigen::VectorXd EllipticalCgf::gradient(const Eigen::VectorXd& s) const {
  if (s.size() != m_.size()) throw InputError("cgf gradient: wrong size");
  const Eigen::VectorXd gs = Gamma_ * s;
  const double q = 0.5 * s.dot(gs);
  double alpha = 0.0;
  double p = 1.0;  // q^(r-1) / (r-1)!
  for (int r = 1; r <= coeffs_.size(); ++r) {
    alpha += coeffs_[r - 1] * p;
    p *= q / static_cast<double>(r);
  }
  return m_ + alpha * gs;
}

Eigen::MatrixXd EllipticalCgf::hessian(const Eigen::VectorXd& s) const {
  if (s.size() != m_.size()) throw InputError("cgf hessian: wrong size");
  const Eigen::VectorXd gs = Gamma_ * s;
  const double q = 0.5 * s.dot(gs);
  double alpha = 0.0, beta = 0.0;
  double pa = 1.0;  // q^(r-1) / (r-1)!
  double pb = 1.0;  // q^(r-2) / (r-2)!
  for (int r = 1; r <= coeffs_.size(); ++r) {
    alpha += coeffs_[r - 1] * pa;
    if (r >= 2) {
      beta += coeffs_[r - 1] * pb;
      pb *= q / static_cast<double>(r - 1);
    }
    pa *= q / static_cast<double>(r);
  }
  return alpha * Gamma_ + beta * (gs * gs.transpose());
}

EllipticalCgf EllipticalCgf::marginal(const std::vector<int>& subset) const {
  check_subset(dimension(), subset, "marginal");
  const int k = static_cast<int>(subset.size());
  Eigen::VectorXd ms(k);
  Eigen::MatrixXd Gs(k, k);
  for (int a = 0; a < k; ++a) {
    ms[a] = m_[subset[a]];
    for (int b = 0; b < k; ++b) Gs(a, b) = Gamma_(subset[a], subset[b]);
  }
  return EllipticalCgf(ms, Gs, coeffs_);
}

// ---------------------------------------------------------------------------
// aggregation

AggregationMap::AggregationMap(int dimension,
                               std::vector<std::vector<int>> groups)
    : dimension_(dimension), groups_(std::move(groups)) {
  if (dimension < 1) throw InputError("AggregationMap: dimension must be >= 1");
  if (groups_.empty()) throw InputError("AggregationMap: no groups");
  std::vector<bool> used(dimension, false);
  for (auto& g : groups_) {
    if (g.empty()) throw InputError("AggregationMap: empty group");
    std::sort(g.begin(), g.end());
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (g[k] < 0 || g[k] >= dimension)
        throw InputError("AggregationMap: index " + std::to_string(g[k]) +
                         " out of range");
      if (k > 0 && g[k] == g[k - 1])
        throw InputError("AggregationMap: duplicate index in group");
      if (used[g[k]])
        throw InputError("AggregationMap: index " + std::to_string(g[k]) +
                         " appears in more than one group");
      used[g[k]] = true;
    }
  }
}

Eigen::MatrixXd AggregationMap::selection_matrix() const {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dimension_, group_count());
  for (int g = 0; g < group_count(); ++g)
    for (int j : groups_[g]) G(j, g) = 1.0;
  return G;
}

AggregatedCgf::AggregatedCgf(EllipticalCgf model, AggregationMap map)
    : model_(std::move(model)), map_(std::move(map)),
      G_(map_.selection_matrix()) {
  if (map_.dimension() != model_.dimension())
    throw InputError("AggregatedCgf: map dimension does not match model");
}

double AggregatedCgf::value(const Eigen::VectorXd& t) const {
  if (t.size() != dimension()) throw InputError("aggregated cgf: wrong size");
  return model_.value(G_ * t);
}

Eigen::VectorXd AggregatedCgf::gradient(const Eigen::VectorXd& t) const {
  if (t.size() != dimension()) throw InputError("aggregated cgf: wrong size");
  return G_.transpose() * model_.gradient(G_ * t);
}

Eigen::MatrixXd AggregatedCgf::hessian(const Eigen::VectorXd& t) const {
  if (t.size() != dimension()) throw InputError("aggregated cgf: wrong size");
  return G_.transpose() * model_.hessian(G_ * t) * G_;
}

AggregatedCgf aggregate_cgf(const EllipticalCgf& model,
                            const AggregationMap& map) {
  return AggregatedCgf(model, map);
}

SumCgf::SumCgf(const EllipticalCgf& model, const std::vector<int>& subset)
    : coeffs_(model.coeffs()) {
  check_subset(model.dimension(), subset, "SumCgf");
  M_ = 0.0;
  for (int j : subset) M_ += model.m()[j];
  T_ = cgflab::block_sum(model.Gamma(), subset, subset);
}

double SumCgf::value(double t) const {
  const double q = 0.5 * t * t * T_;
  double sum = M_ * t;
  double p = 1.0;
  for (int r = 1; r <= coeffs_.size(); ++r) {
    p *= q / static_cast<double>(r);
    sum += coeffs_[r - 1] * p;
  }
  return sum;
}

double SumCgf::d1(double t) const {
  const double q = 0.5 * t * t * T_;
  double alpha = 0.0;
  double p = 1.0;
  for (int r = 1; r <= coeffs_.size(); ++r) {
    alpha += coeffs_[r - 1] * p;
    p *= q / static_cast<double>(r);
  }
  return M_ + alpha * T_ * t;
}

double SumCgf::d2(double t) const {
  const double q = 0.5 * t * t * T_;
  double alpha = 0.0, beta = 0.0;
  double pa = 1.0, pb = 1.0;
  for (int r = 1; r <= coeffs_.size(); ++r) {
    alpha += coeffs_[r - 1] * pa;
    if (r >= 2) {
      beta += coeffs_[r - 1] * pb;
      pb *= q / static_cast<double>(r - 1);
    }
    pa *= q / static_cast<double>(r);
  }
  return alpha * T_ + beta * T_ * T_ * t * t;
}

double SumCgf::cumulant_at_zero(int r) const {
  if (r < 1 || r > 5)
    throw InputError("cumulant_at_zero: order must be in [1, 5]");
  if (r == 1) return M_;
  if (r % 2 == 1) return 0.0;
  const int half = r / 2;
  if (half > coeffs_.size()) return 0.0;
  return double_factorial_odd(half) * coeffs_[half - 1] * std::pow(T_, half);
}

double sum_cumulants(const EllipticalCgf& model, const std::vector<int>& subset,
                     int order) {
  check_subset(model.dimension(), subset, "sum_cumulants");
  if (order < 1) throw InputError("sum_cumulants: order must be >= 1");
  double M = 0.0;
  for (int j : subset) M += model.m()[j];
  if (order == 1) return M;
  if (order % 2 == 1) return 0.0;
  const int r = order / 2;
  if (r > model.coefficient_count())
    throw InputError("sum_cumulants: order " + std::to_string(order) +
                     " needs coefficient c_" + std::to_string(r) +
                     ", model has " +
                     std::to_string(model.coefficient_count()));
  const double T = block_sum(model.Gamma(), subset, subset);
  return double_factorial_odd(r) * model.coeffs()[r - 1] * std::pow(T, r);
}

Eigen::MatrixXd group_cov(const EllipticalCgf& model, const AggregationMap& map,
                          GroupFormula formula) {
  if (map.dimension() != model.dimension())
    throw InputError("group_cov: map dimension does not match model");
  const int l = map.group_count();
  const double c1 = model.coeffs()[0];
  Eigen::MatrixXd cov(l, l);
  for (int a = 0; a < l; ++a)
    for (int b = a; b < l; ++b) {
      const double S = block_sum(model.Gamma(), map.groups()[a],
                                 map.groups()[b]);
      double v = c1 * S;
      if (formula == GroupFormula::kAlternate && a != b) v *= 0.5;
      cov(a, b) = v;
      cov(b, a) = v;
    }
  return cov;
}

Eigen::VectorXd group_cumulants(const EllipticalCgf& model,
                                const AggregationMap& map, int order,
                                GroupFormula formula) {
  if (map.dimension() != model.dimension())
    throw InputError("group_cumulants: map dimension does not match model");
  if (order < 1) throw InputError("group_cumulants: order must be >= 1");
  const int l = map.group_count();
  Eigen::VectorXd out(l);
  for (int g = 0; g < l; ++g) {
    const auto& grp = map.groups()[g];
    if (order == 1) {
      double M = 0.0;
      for (int j : grp) M += model.m()[j];
      out[g] = M;
      continue;
    }
    if (order % 2 == 1) {
      out[g] = 0.0;
      continue;
    }
    const int r = order / 2;
    if (r > model.coefficient_count())
      throw InputError("group_cumulants: order " + std::to_string(order) +
                       " needs coefficient c_" + std::to_string(r));
    const double T = block_sum(model.Gamma(), grp, grp);
    const double c = model.coeffs()[r - 1];
    out[g] = (formula == GroupFormula::kCgfDerived)
                 ? double_factorial_odd(r) * c * std::pow(T, r)
                 : factorial(2 * r - 1) * c * std::pow(T, r);
  }
  return out;
}

ValidityReport validate_model(const EllipticalCgf& model,
                              int mixture_components) {
  ValidityReport report;
  const Eigen::MatrixXd& Gamma = model.Gamma();
  report.gamma_symmetric = true;  // enforced at construction
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gamma,
                                                    Eigen::EigenvaluesOnly);
  report.min_eigenvalue = es.eigenvalues().minCoeff();
  report.max_eigenvalue = es.eigenvalues().maxCoeff();
  report.gamma_psd =
      report.min_eigenvalue >=
      -kEigTol * std::max(report.max_eigenvalue, 1e-300);
  if (!report.gamma_psd) report.messages.push_back("Gamma is not PSD");

  std::vector<double> targets(model.coeffs().data(),
                              model.coeffs().data() + model.coeffs().size());
  try {
    GammaMixture mix = fit_gamma_mixture(targets, mixture_components);
    report.coeffs_realizable = true;
    report.mixture_residual = mix.fit_residual;
  } catch (const FitError& e) {
    report.coeffs_realizable = false;
    report.mixture_residual = e.best_residual();
    report.messages.push_back(
        "coefficients not realizable as mixing-variable cumulants: " +
        std::string(e.what()));
  }
  return report;
}

// ---------------------------------------------------------------------------
// serialization

std::string model_to_json(const EllipticalCgf& model) {
  nlohmann::json doc;
  doc["m"] = std::vector<double>(model.m().data(),
                                 model.m().data() + model.m().size());
  std::vector<double> flat;
  flat.reserve(model.dimension() * model.dimension());
  for (int i = 0; i < model.dimension(); ++i)
    for (int j = 0; j < model.dimension(); ++j)
      flat.push_back(model.Gamma()(i, j));
  doc["Gamma"] = flat;
  doc["coeffs"] = std::vector<double>(
      model.coeffs().data(), model.coeffs().data() + model.coeffs().size());
  return doc.dump(2);
}

EllipticalCgf model_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("model document: ") + e.what());
  }
  for (const char* key : {"m", "Gamma", "coeffs"})
    if (!doc.contains(key) || !doc[key].is_array())
      throw InputError(std::string("model document: missing array field '") +
                       key + "'");
  const auto to_vector = [&](const char* key) {
    std::vector<double> v;
    for (const auto& e : doc[key]) {
      if (!e.is_number())
        throw InputError(std::string("model document: field '") + key +
                         "' has a non-numeric entry");
      v.push_back(e.get<double>());
    }
    return v;
  };
  const std::vector<double> m = to_vector("m");
  const std::vector<double> flat = to_vector("Gamma");
  const std::vector<double> coeffs = to_vector("coeffs");
  const int J = static_cast<int>(m.size());
  if (static_cast<int>(flat.size()) != J * J)
    throw InputError("model document: Gamma has wrong length");
  Eigen::VectorXd mv = Eigen::Map<const Eigen::VectorXd>(m.data(), J);
  Eigen::MatrixXd Gamma(J, J);
  for (int i = 0; i < J; ++i)
    for (int j = 0; j < J; ++j) Gamma(i, j) = flat[i * J + j];
  Eigen::VectorXd cv =
      Eigen::Map<const Eigen::VectorXd>(coeffs.data(), coeffs.size());
  return EllipticalCgf(std::move(mv), std::move(Gamma), std::move(cv));
}

}  // namespace cgflab
