// Python bindings for the core operations: partition algebra, sample
// cumulants, model evaluation, estimation, analytic approximations, and
// simulation.  Matrices cross the boundary as NumPy arrays via Eigen.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

#include "cgflab/cgf_model.hpp"
#include "cgflab/cumulants.hpp"
#include "cgflab/density.hpp"
#include "cgflab/errors.hpp"
#include "cgflab/estimation.hpp"
#include "cgflab/partitions.hpp"
#include "cgflab/simulation.hpp"

namespace py = pybind11;
using namespace cgflab;

namespace {

MultiIndex make_index(const std::vector<int>& indices) {
  return MultiIndex(indices);
}

SimulationPlan make_plan(long n, long replicates, std::uint64_t seed,
                         const std::vector<double>& levels, int block) {
  SimulationPlan plan;
  plan.n = n;
  plan.replicates = replicates;
  plan.seed = seed;
  plan.levels = levels;
  plan.block = block;
  return plan;
}

}  // namespace

PYBIND11_MODULE(_cgflab, m) {
  m.doc() = "Cumulant generating function models of joint dependence";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<FitError>(m, "FitError", PyExc_ArithmeticError);

  // --- partition algebra ---
  m.def("bell_number", &bell_number, py::arg("k"),
        "Number of set partitions of a k-element set.");
  m.def(
      "enumerate_partitions",
      [](int d) {
        std::vector<std::vector<std::vector<int>>> out;
        for (const SetPartition& p : enumerate_partitions(d)) {
          out.push_back(p.blocks);
        }
        return out;
      },
      py::arg("d"),
      "All partitions of {0, ..., d-1} as lists of blocks, deterministic "
      "order.");
  m.def(
      "mobius_weight",
      [](const std::vector<std::vector<int>>& blocks) {
        SetPartition p;
        p.blocks = blocks;
        for (const auto& b : blocks) {
          p.ground_size += static_cast<int>(b.size());
        }
        return mobius_weight(p);
      },
      py::arg("blocks"),
      "Moebius weight (-1)^(b-1) (b-1)! of a partition given by its blocks.");

  // --- sample cumulants ---
  m.def(
      "sample_joint_cumulant",
      [](const Eigen::MatrixXd& data, const std::vector<int>& indices) {
        return sample_joint_cumulant(data, make_index(indices));
      },
      py::arg("data"), py::arg("indices"),
      "Plug-in joint cumulant of the data columns named by the multi-index.");
  m.def("cumulant_of_sum", &cumulant_of_sum, py::arg("data"), py::arg("subset"),
        py::arg("order"),
        "Order-r cumulant of the sum of the subset columns, via the "
        "multilinear expansion.");
  m.def("sample_cumulants_of_series", &sample_cumulants_of_series,
        py::arg("series"), py::arg("max_order"),
        "Univariate plug-in cumulants of orders 1..max_order.");

  // --- model ---
  py::class_<EllipticalCgf>(m, "EllipticalCgf",
                            "K(s) = m's + sum_r (c_r/r!) (s'Gamma s / 2)^r")
      .def(py::init<Eigen::VectorXd, Eigen::MatrixXd, Eigen::VectorXd>(),
           py::arg("m"), py::arg("Gamma"), py::arg("coeffs"))
      .def_property_readonly("m", &EllipticalCgf::m)
      .def_property_readonly("Gamma", &EllipticalCgf::Gamma)
      .def_property_readonly("coeffs", &EllipticalCgf::coeffs)
      .def_property_readonly("dimension", &EllipticalCgf::dimension)
      .def("value", &EllipticalCgf::value, py::arg("s"))
      .def("gradient", &EllipticalCgf::gradient, py::arg("s"))
      .def("hessian", &EllipticalCgf::hessian, py::arg("s"))
      .def("marginal", &EllipticalCgf::marginal, py::arg("subset"))
      .def("to_json", [](const EllipticalCgf& model) {
        return model_to_json(model);
      });
  m.def("model_from_json", &model_from_json, py::arg("text"));
  m.def("sum_cumulants", &sum_cumulants, py::arg("model"), py::arg("subset"),
        py::arg("order"),
        "Order-r cumulant of the sum over the subset coordinates.");
  m.def(
      "group_cov",
      [](const EllipticalCgf& model, const std::vector<std::vector<int>>& groups) {
        return group_cov(model, AggregationMap(model.dimension(), groups));
      },
      py::arg("model"), py::arg("groups"),
      "Covariance matrix of the group-aggregated vector.");
  m.def(
      "group_cumulants",
      [](const EllipticalCgf& model, const std::vector<std::vector<int>>& groups,
         int order) {
        return group_cumulants(model, AggregationMap(model.dimension(), groups),
                               order);
      },
      py::arg("model"), py::arg("groups"), py::arg("order"),
      "Per-group cumulants of the aggregated vector.");

  // --- estimation ---
  m.def("kendall_tau", &kendall_tau, py::arg("x"), py::arg("y"),
        "Kendall tau-b of two series, O(n log n).");
  m.def(
      "estimate_covariance",
      [](const Eigen::MatrixXd& data) {
        const CovarianceEstimate est = estimate_covariance(data);
        py::dict out;
        out["Gamma"] = est.Gamma;
        out["correlation"] = est.correlation;
        out["psd_projected"] = est.psd_projected;
        out["psd_adjustment"] = est.psd_adjustment;
        return out;
      },
      py::arg("data"),
      "Rank-based scale matrix estimate (Kendall tau through sin(pi tau / "
      "2)).");
  m.def("fit_coefficients", &fit_coefficients, py::arg("Gamma"),
        py::arg("sum_cumulant_values"), py::arg("orders"),
        "Coefficients c_r from sum cumulants: c_r = kappa_2r / ((2r-1)!! "
        "T^r).");

  py::class_<GammaMixture>(m, "GammaMixture",
                           "Finite gamma mixture (or point mass) for the "
                           "mixing variable")
      .def(py::init<>())
      .def_readwrite("weights", &GammaMixture::weights)
      .def_readwrite("shapes", &GammaMixture::shapes)
      .def_readwrite("scales", &GammaMixture::scales)
      .def_readonly("degenerate", &GammaMixture::degenerate)
      .def_readonly("point", &GammaMixture::point)
      .def_readonly("fit_residual", &GammaMixture::fit_residual)
      .def("moment", &GammaMixture::moment, py::arg("r"))
      .def("cumulant", &GammaMixture::cumulant, py::arg("r"))
      .def("validate", &GammaMixture::validate)
      .def_static("point_mass", &GammaMixture::point_mass, py::arg("value"));
  m.def("fit_gamma_mixture", &fit_gamma_mixture, py::arg("targets"),
        py::arg("n_components"),
        "Gamma mixture whose cumulants of orders 1..R match the targets.");

  // --- analytic approximations ---
  m.def(
      "saddlepoint_density",
      [](const EllipticalCgf& model, const Eigen::VectorXd& x) {
        return saddlepoint_density(model, x);
      },
      py::arg("model"), py::arg("x"),
      "First-order saddlepoint density of the model at x.");
  m.def(
      "sum_tail_cdf",
      [](const EllipticalCgf& model, const std::vector<int>& subset,
         double x0) {
        return lugannani_rice_cdf(SumCgf(model, subset), x0);
      },
      py::arg("model"), py::arg("subset"), py::arg("x0"),
      "Lugannani-Rice CDF of the subset sum at x0.");
  m.def("cornish_fisher_quantile", &cornish_fisher_quantile, py::arg("kappa1"),
        py::arg("kappa2"), py::arg("kappa3"), py::arg("kappa4"), py::arg("p"),
        "Fourth-order Cornish-Fisher quantile.");
  m.def("gaussian_entropy", &gaussian_entropy, py::arg("Gamma"),
        "Differential entropy of the Gaussian with covariance Gamma.");

  // --- simulation ---
  m.def("sample_model", &sample_model, py::arg("model"), py::arg("mix"),
        py::arg("n"), py::arg("seed"), py::arg("stream") = 0,
        "One deterministic draw of n rows from the scale-mixture model.");
  m.def(
      "monte_carlo_bands",
      [](const EllipticalCgf& model, const GammaMixture& mix, long n,
         long replicates, std::uint64_t seed, std::vector<double> levels,
         int block) {
        if (levels.empty()) {
          levels = SimulationPlan::default_levels();
        }
        const QuantileBands bands = monte_carlo_bands(
            model, mix, make_plan(n, replicates, seed, levels, block));
        py::dict out;
        out["levels"] = bands.levels;
        out["lower"] = bands.lower;
        out["upper"] = bands.upper;
        return out;
      },
      py::arg("model"), py::arg("mix"), py::arg("n"), py::arg("replicates"),
      py::arg("seed"), py::arg("levels") = std::vector<double>{},
      py::arg("block") = 365,
      "Empirical 95% bands of row-sum quantiles across replicates.");

  // --- spatial scale matrices ---
  m.def(
      "powered_exp_cov",
      [](double distance, double sigma0_sq, double sigma1_sq, double theta1,
         double theta2) {
        return powered_exp_cov(
            distance, PoweredExpParams{sigma0_sq, sigma1_sq, theta1, theta2});
      },
      py::arg("distance"), py::arg("sigma0_sq") = 0.0,
      py::arg("sigma1_sq") = 1.0, py::arg("theta1") = 1.0,
      py::arg("theta2") = 1.0,
      "Powered exponential covariance with nugget.");
  m.def(
      "build_gamma",
      [](const std::vector<std::array<double, 2>>& locations, double sigma0_sq,
         double sigma1_sq, double theta1, double theta2) {
        return build_gamma(
            locations, PoweredExpParams{sigma0_sq, sigma1_sq, theta1, theta2});
      },
      py::arg("locations"), py::arg("sigma0_sq") = 0.0,
      py::arg("sigma1_sq") = 1.0, py::arg("theta1") = 1.0,
      py::arg("theta2") = 1.0,
      "Scale matrix over planar locations from the powered exponential "
      "family.");
}
