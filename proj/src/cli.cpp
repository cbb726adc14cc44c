#include "cgflab/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cgflab/cgf_model.hpp"
#include "cgflab/csv.hpp"
#include "cgflab/cumulants.hpp"
#include "cgflab/density.hpp"
#include "cgflab/errors.hpp"
#include "cgflab/estimation.hpp"
#include "cgflab/lancaster.hpp"
#include "cgflab/simulation.hpp"

namespace cgflab::cli {

namespace {

using nlohmann::json;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    parts.push_back(item);
  }
  return parts;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  if (text.empty()) {
    return out;
  }
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) {
        throw std::invalid_argument(item);
      }
      out.push_back(v);
    } catch (const std::exception&) {
      throw InputError("cannot parse integer '" + item + "' in '" + text + "'");
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) {
    return out;
  }
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) {
        throw std::invalid_argument(item);
      }
      out.push_back(v);
    } catch (const std::exception&) {
      throw InputError("cannot parse number '" + item + "' in '" + text + "'");
    }
  }
  return out;
}

// Groups are semicolon-separated index lists: "0,1,2;3,4".
std::vector<std::vector<int>> parse_group_list(const std::string& text) {
  std::vector<std::vector<int>> out;
  if (text.empty()) {
    return out;
  }
  std::string group;
  std::istringstream in(text);
  while (std::getline(in, group, ';')) {
    out.push_back(parse_int_list(group));
  }
  return out;
}

struct RunConfig {
  std::string input;
  std::vector<int> columns;                // empty = all
  std::vector<std::vector<int>> groups;    // aggregation map spec
  std::vector<int> orders{2, 4, 6};
  int components = 5;
  long n = 10950;
  long replicates = 1000;
  bool seed_set = false;
  std::uint64_t seed = 0;
  int block = 365;
  std::vector<double> levels;              // percent, 0 = min, 100 = max
  std::string output = ".";
  std::string model;
  bool emit_samples = false;
  bool csv_only = false;

  static std::vector<double> default_levels() {
    std::vector<double> out;
    for (double p : SimulationPlan::default_levels()) {
      out.push_back(100.0 * p);
    }
    return out;
  }
};

// Bound flag values; shared by all subcommands (only one runs per parse).
struct Flags {
  std::string config;
  std::string input;
  std::string columns;
  std::string groups;
  std::string orders;
  std::string levels;
  std::string output = ".";
  std::string model;
  std::string at;
  std::string thresholds;
  std::string subset;
  long long components = 5;
  long long n = 10950;
  long long replicates = 1000;
  long long block = 365;
  long long nodes = 64;
  unsigned long long seed = 0;
  double x0 = 0.0;
  bool emit_samples = false;
  bool csv_only = false;
};

long require_count(const json& v, const char* key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw InputError(std::string("config key '") + key +
                     "' must be a non-negative integer");
  }
  return v.get<long>();
}

void apply_config_json(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open config file " + path);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config " + path + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw InputError("config " + path + ": top level must be an object");
  }
  for (const auto& [key, value] : doc.items()) {
    if (key == "input") {
      cfg.input = value.get<std::string>();
    } else if (key == "columns") {
      cfg.columns = value.get<std::vector<int>>();
    } else if (key == "groups") {
      cfg.groups = value.get<std::vector<std::vector<int>>>();
    } else if (key == "orders") {
      cfg.orders = value.get<std::vector<int>>();
    } else if (key == "components") {
      cfg.components = static_cast<int>(require_count(value, "components"));
    } else if (key == "n") {
      cfg.n = require_count(value, "n");
    } else if (key == "replicates") {
      cfg.replicates = require_count(value, "replicates");
    } else if (key == "seed") {
      cfg.seed = value.get<std::uint64_t>();
      cfg.seed_set = true;
    } else if (key == "block") {
      cfg.block = static_cast<int>(require_count(value, "block"));
    } else if (key == "levels") {
      cfg.levels = value.get<std::vector<double>>();
    } else if (key == "output") {
      cfg.output = value.get<std::string>();
    } else if (key == "model") {
      cfg.model = value.get<std::string>();
    } else if (key == "emit-samples") {
      cfg.emit_samples = value.get<bool>();
    } else if (key == "csv-only") {
      cfg.csv_only = value.get<bool>();
    } else {
      throw InputError("config " + path + ": unknown key '" + key + "'");
    }
  }
}

// Defaults, then the config file, then explicitly given flags.
RunConfig build_config(const CLI::App& cmd, const Flags& f) {
  const auto gave = [&cmd](const char* name) {
    const CLI::Option* opt = cmd.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  RunConfig cfg;
  if (gave("--config")) {
    apply_config_json(cfg, f.config);
  }
  if (gave("--input")) cfg.input = f.input;
  if (gave("--columns")) cfg.columns = parse_int_list(f.columns);
  if (gave("--groups")) cfg.groups = parse_group_list(f.groups);
  if (gave("--orders")) cfg.orders = parse_int_list(f.orders);
  if (gave("--components")) cfg.components = static_cast<int>(f.components);
  if (gave("--n")) cfg.n = static_cast<long>(f.n);
  if (gave("--replicates")) cfg.replicates = static_cast<long>(f.replicates);
  if (gave("--seed")) {
    cfg.seed = f.seed;
    cfg.seed_set = true;
  }
  if (gave("--block")) cfg.block = static_cast<int>(f.block);
  if (gave("--levels")) cfg.levels = parse_double_list(f.levels);
  if (gave("--output")) cfg.output = f.output;
  if (gave("--model")) cfg.model = f.model;
  if (gave("--emit-samples")) cfg.emit_samples = f.emit_samples;
  if (gave("--csv-only")) cfg.csv_only = f.csv_only;
  return cfg;
}

CsvTable load_data(const RunConfig& cfg) {
  if (cfg.input.empty()) {
    throw InputError("--input is required");
  }
  return select_columns(read_csv(cfg.input), cfg.columns);
}

void require_seed(const RunConfig& cfg) {
  if (!cfg.seed_set) {
    throw InputError("--seed is required (no wall-clock seeding)");
  }
}

SimulationPlan make_plan(const RunConfig& cfg) {
  SimulationPlan plan;
  plan.n = cfg.n;
  plan.replicates = cfg.replicates;
  plan.seed = cfg.seed;
  plan.block = cfg.block;
  for (double p : cfg.levels) {
    if (!(p >= 0.0 && p <= 100.0)) {
      throw InputError("levels are percent and must lie in [0, 100]");
    }
    plan.levels.push_back(p / 100.0);
  }
  return plan;
}

std::string write_text(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw InputError("cannot open " + path.string() + " for writing");
  }
  out << content;
  return path.string();
}

json mixture_to_json(const GammaMixture& mix) {
  json j;
  if (mix.degenerate) {
    j["point_mass"] = mix.point;
    return j;
  }
  j["weights"] = mix.weights;
  j["shapes"] = mix.shapes;
  j["scales"] = mix.scales;
  j["fit_residual"] = mix.fit_residual;
  return j;
}

GammaMixture mixture_from_json(const json& j) {
  if (!j.is_object()) {
    throw InputError("mixture entry must be an object");
  }
  if (j.contains("point_mass")) {
    return GammaMixture::point_mass(j.at("point_mass").get<double>());
  }
  GammaMixture mix;
  mix.weights = j.at("weights").get<std::vector<double>>();
  mix.shapes = j.at("shapes").get<std::vector<double>>();
  mix.scales = j.at("scales").get<std::vector<double>>();
  if (j.contains("fit_residual")) {
    mix.fit_residual = j.at("fit_residual").get<double>();
  }
  mix.validate();
  return mix;
}

struct ModelDocument {
  EllipticalCgf model;
  GammaMixture mix;
  bool has_mix;
  std::vector<std::string> columns;
};

ModelDocument load_model_document(const RunConfig& cfg) {
  if (cfg.model.empty()) {
    throw InputError("--model is required");
  }
  std::ifstream in(cfg.model);
  if (!in) {
    throw InputError("cannot open model document " + cfg.model);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  EllipticalCgf model = model_from_json(text);
  GammaMixture mix = GammaMixture::point_mass(1.0);
  bool has_mix = false;
  std::vector<std::string> columns;
  const json doc = json::parse(text);
  if (doc.contains("mixture")) {
    mix = mixture_from_json(doc.at("mixture"));
    has_mix = true;
  }
  if (doc.contains("diagnostics") && doc.at("diagnostics").contains("columns")) {
    columns = doc.at("diagnostics").at("columns").get<std::vector<std::string>>();
  }
  return ModelDocument{std::move(model), std::move(mix), has_mix,
                       std::move(columns)};
}

const GammaMixture& require_mixture(const ModelDocument& doc) {
  if (!doc.has_mix) {
    throw InputError("model document has no mixture (run fit first)");
  }
  return doc.mix;
}

// Simulation draws from the mixing law, so analytic approximations use the
// mixture-implied coefficients (its cumulants) when a mixture is present;
// they coincide with the stored coefficients up to the fit residual and
// are guaranteed to come from a genuine scale mixture.
EllipticalCgf effective_model(const ModelDocument& doc) {
  if (!doc.has_mix) {
    return doc.model;
  }
  Eigen::VectorXd c(doc.model.coefficient_count());
  for (Eigen::Index r = 0; r < c.size(); ++r) {
    c[r] = doc.mix.cumulant(static_cast<int>(r) + 1);
  }
  return EllipticalCgf(doc.model.m(), doc.model.Gamma(), c);
}

std::vector<int> subset_or_all(const std::string& text, int dimension) {
  std::vector<int> subset = parse_int_list(text);
  if (subset.empty()) {
    subset.resize(static_cast<std::size_t>(dimension));
    for (int j = 0; j < dimension; ++j) {
      subset[static_cast<std::size_t>(j)] = j;
    }
  }
  return subset;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

void cmd_ingest(const RunConfig& cfg, std::ostream& out) {
  const CsvTable table = load_data(cfg);
  const Eigen::Index n = table.data.rows();
  const Eigen::Index dim = table.data.cols();
  out << "rows: " << n << "\n";
  out << "columns: " << dim << "\n";
  out << "  column                  mean        variance        skewness\n";
  for (Eigen::Index c = 0; c < dim; ++c) {
    const Eigen::VectorXd col = table.data.col(c);
    const double mean = col.mean();
    const Eigen::ArrayXd centered = col.array() - mean;
    const double m2 = centered.square().mean();
    const double m3 = centered.cube().mean();
    const double skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    char line[160];
    std::snprintf(line, sizeof(line), "  %-12s %15.6g %15.6g %15.6g\n",
                  table.header[static_cast<std::size_t>(c)].c_str(), mean, m2,
                  skew);
    out << line;
  }
}

void check_constant_columns(const CsvTable& table) {
  for (Eigen::Index c = 0; c < table.data.cols(); ++c) {
    if (table.data.col(c).maxCoeff() == table.data.col(c).minCoeff()) {
      throw InputError("column '" + table.header[static_cast<std::size_t>(c)] +
                       "' is constant");
    }
  }
}

void cmd_fit(const RunConfig& cfg, std::ostream& out) {
  const CsvTable table = load_data(cfg);
  check_constant_columns(table);
  const Eigen::Index n = table.data.rows();
  const Eigen::Index dim = table.data.cols();

  const CovarianceEstimate cov = estimate_covariance(table.data);

  int max_order = 0;
  for (int r : cfg.orders) {
    max_order = std::max(max_order, r);
  }
  if (max_order < 2 || max_order > kMaxCumulantOrder) {
    throw InputError("orders must lie in [2, 8]");
  }
  const Eigen::VectorXd sums = table.data.rowwise().sum();
  const std::vector<double> kappa = sample_cumulants_of_series(sums, max_order);
  std::vector<double> targets;
  for (int r : cfg.orders) {
    targets.push_back(kappa[static_cast<std::size_t>(r - 1)]);
  }
  const Eigen::VectorXd coeffs =
      fit_coefficients(cov.Gamma, targets, cfg.orders);

  std::vector<double> coeff_vec(coeffs.data(), coeffs.data() + coeffs.size());
  bool realizable = true;
  GammaMixture mix;
  try {
    mix = fit_gamma_mixture(coeff_vec, cfg.components);
  } catch (const FitError&) {
    // Near-Gaussian data yields higher coefficients that are small or
    // negative, which no positive mixing law attains; project onto the
    // degenerate member (V a point mass at c1) and report the residual.
    const double c1 = coeff_vec[0];
    double worst = 0.0;
    for (std::size_t r = 2; r <= coeff_vec.size(); ++r) {
      worst = std::max(worst, std::abs(coeff_vec[r - 1]) /
                                  std::pow(c1, static_cast<double>(r)));
    }
    if (!(c1 > 0.0) || worst > 0.4) {
      throw;
    }
    mix = GammaMixture::point_mass(c1);
    mix.fit_residual = worst;
    realizable = false;
  }

  Eigen::VectorXd m(dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    m[c] = table.data.col(c).mean();
  }
  const EllipticalCgf model(m, cov.Gamma, coeffs);

  json doc = json::parse(model_to_json(model));
  doc["mixture"] = mixture_to_json(mix);
  json diag;
  diag["n"] = n;
  diag["columns"] = table.header;
  diag["orders"] = cfg.orders;
  diag["sum_cumulants"] = targets;
  diag["psd_projected"] = cov.psd_projected;
  diag["psd_adjustment"] = cov.psd_adjustment;
  diag["mixture_residual"] = mix.fit_residual;
  diag["coeffs_realizable"] = realizable;
  doc["diagnostics"] = diag;

  std::filesystem::create_directories(cfg.output);
  const std::string path =
      write_text(std::filesystem::path(cfg.output) / "model.json",
                 doc.dump(2) + "\n");

  out << "n = " << n << ", J = " << dim << "\n";
  out << "psd_projected = " << (cov.psd_projected ? "yes" : "no")
      << " (adjustment " << fmt("%.6g", cov.psd_adjustment) << ")\n";
  for (std::size_t k = 0; k < targets.size(); ++k) {
    out << "sum cumulant order " << cfg.orders[k] << " = "
        << fmt("%.6g", targets[k]) << "\n";
  }
  for (Eigen::Index r = 0; r < coeffs.size(); ++r) {
    out << "c" << (r + 1) << " = " << fmt("%.6g", coeffs[r]) << "\n";
  }
  if (realizable) {
    out << "mixture components = " << mix.component_count()
        << ", max relative residual = " << fmt("%.3g", mix.fit_residual)
        << "\n";
  } else {
    out << "note: higher coefficients are not realizable by a positive "
           "mixing law;\nusing a point mass at c1 (residual "
        << fmt("%.3g", mix.fit_residual) << ")\n";
  }
  out << "wrote " << path << "\n";
}

void cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const ModelDocument doc = load_model_document(cfg);
  const GammaMixture& mix = require_mixture(doc);
  require_seed(cfg);
  const SimulationPlan plan = make_plan(cfg);

  const std::vector<ReplicateSummary> summaries =
      simulate_replicate_summaries(doc.model, mix, plan);
  std::vector<std::vector<double>> rows;
  for (const auto& s : summaries) {
    rows.push_back({static_cast<double>(s.replicate), s.kappa2, s.kappa4,
                    s.kappa6});
  }
  std::filesystem::create_directories(cfg.output);
  const std::filesystem::path outdir(cfg.output);
  write_csv_file((outdir / "replicates.csv").string(),
                 {"replicate", "kappa2", "kappa4", "kappa6"}, rows);
  out << "wrote " << (outdir / "replicates.csv").string() << "\n";

  if (cfg.emit_samples) {
    const Eigen::MatrixXd sample =
        sample_model(doc.model, mix, plan.n, plan.seed, 0);
    std::vector<std::string> header = doc.columns;
    if (static_cast<Eigen::Index>(header.size()) != sample.cols()) {
      header.clear();
      for (Eigen::Index c = 0; c < sample.cols(); ++c) {
        header.push_back("c" + std::to_string(c));
      }
    }
    std::vector<std::vector<double>> sample_rows(
        static_cast<std::size_t>(sample.rows()));
    for (Eigen::Index r = 0; r < sample.rows(); ++r) {
      auto& row = sample_rows[static_cast<std::size_t>(r)];
      row.resize(static_cast<std::size_t>(sample.cols()));
      for (Eigen::Index c = 0; c < sample.cols(); ++c) {
        row[static_cast<std::size_t>(c)] = sample(r, c);
      }
    }
    write_csv_file((outdir / "samples.csv").string(), header, sample_rows);
    out << "wrote " << (outdir / "samples.csv").string() << "\n";
  }
}

std::string level_label(double percent) {
  if (percent == 0.0) {
    return "min";
  }
  if (percent == 100.0) {
    return "max";
  }
  return fmt("%g", percent);
}

void cmd_report(const RunConfig& cfg, std::ostream& out) {
  const ModelDocument doc = load_model_document(cfg);
  const GammaMixture& mix = require_mixture(doc);
  require_seed(cfg);
  RunConfig filled = cfg;
  if (filled.levels.empty()) {
    filled.levels = RunConfig::default_levels();
  }
  const SimulationPlan plan = make_plan(filled);

  const CsvTable table = load_data(filled);
  if (table.data.cols() != doc.model.dimension()) {
    throw InputError("observed data has " + std::to_string(table.data.cols()) +
                     " columns, model expects " +
                     std::to_string(doc.model.dimension()));
  }
  const Eigen::VectorXd observed = table.data.rowwise().sum();

  const QuantileBands bands = monte_carlo_bands(doc.model, mix, plan, &observed);
  const EcdfBands maxima = block_maxima_bands(doc.model, mix, plan, &observed);

  std::filesystem::create_directories(filled.output);
  const std::filesystem::path outdir(filled.output);

  std::vector<std::vector<double>> band_rows;
  for (std::size_t k = 0; k < bands.levels.size(); ++k) {
    band_rows.push_back({100.0 * bands.levels[k], bands.lower[k],
                         bands.upper[k], bands.observed[k]});
  }
  write_csv_file((outdir / "bands.csv").string(),
                 {"level", "lower", "upper", "observed"}, band_rows);

  std::vector<std::vector<double>> max_rows;
  for (std::size_t g = 0; g < maxima.grid.size(); ++g) {
    max_rows.push_back({maxima.grid[g], maxima.lower[g], maxima.upper[g],
                        maxima.observed[g]});
  }
  write_csv_file((outdir / "blockmax.csv").string(),
                 {"value", "lower", "upper", "observed"}, max_rows);
  out << "wrote " << (outdir / "bands.csv").string() << "\n";
  out << "wrote " << (outdir / "blockmax.csv").string() << "\n";

  if (filled.csv_only) {
    return;
  }

  std::ostringstream rep;
  rep << "sum quantile report\n";
  rep << "===================\n\n";
  rep << "model: " << filled.model << "\n";
  rep << "observed: " << filled.input << " (n = " << table.data.rows()
      << ", J = " << table.data.cols() << ")\n";
  rep << "replicates: " << plan.replicates << "   sample size: " << plan.n
      << "   seed: " << plan.seed << "   block: " << plan.block << "\n\n";
  rep << "Bands are empirical quantiles of each level's row-sum quantile\n"
         "across replicates.  The conventional table header labels the\n"
         "lower band 2.75%; it is computed as the 2.5% quantile.\n\n";
  rep << "  Quantile (%)         2.75%         97.5%      Observed  Inside\n";
  int inside = 0;
  for (std::size_t k = 0; k < bands.levels.size(); ++k) {
    const bool in_band = bands.observed[k] >= bands.lower[k] &&
                         bands.observed[k] <= bands.upper[k];
    inside += in_band ? 1 : 0;
    char line[200];
    std::snprintf(line, sizeof(line), "  %-12s %13.6g %13.6g %13.6g  %s\n",
                  level_label(100.0 * bands.levels[k]).c_str(), bands.lower[k],
                  bands.upper[k], bands.observed[k], in_band ? "yes" : "no");
    rep << line;
  }
  rep << "\ninside bands: " << inside << " of " << bands.levels.size()
      << " levels\n";
  rep << "block maxima: " << plan.n / plan.block << " blocks of " << plan.block
      << "; band curves in blockmax.csv\n";
  const std::string path = write_text(outdir / "report.txt", rep.str());
  out << "wrote " << path << "\n";
}

void cmd_approx_density(const RunConfig& cfg, const Flags& f,
                        std::ostream& out) {
  const ModelDocument doc = load_model_document(cfg);
  const EllipticalCgf model = effective_model(doc);
  const std::vector<double> at = parse_double_list(f.at);
  if (at.empty()) {
    throw InputError("--at is required");
  }
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(
      at.data(), static_cast<Eigen::Index>(at.size()));
  double density = 0.0;
  if (!cfg.groups.empty()) {
    const AggregationMap map(model.dimension(), cfg.groups);
    if (static_cast<int>(at.size()) != map.group_count()) {
      throw InputError("--at length must match the group count");
    }
    density = saddlepoint_density(aggregate_cgf(model, map), x);
  } else {
    const std::vector<int> subset =
        subset_or_all(f.subset, model.dimension());
    if (at.size() != subset.size()) {
      throw InputError("--at length must match the coordinate count");
    }
    density = saddlepoint_density(model.marginal(subset), x);
  }
  out << "saddlepoint_density = " << fmt("%.12g", density) << "\n";
}

void cmd_approx_tail(const RunConfig& cfg, const Flags& f, const CLI::App& cmd,
                     std::ostream& out) {
  const ModelDocument doc = load_model_document(cfg);
  const EllipticalCgf model = effective_model(doc);
  const bool have_x0 = cmd.get_option_no_throw("--x0") != nullptr &&
                       cmd.get_option_no_throw("--x0")->count() > 0;
  if (have_x0) {
    const std::vector<int> subset =
        subset_or_all(f.subset, model.dimension());
    const SumCgf sum_cgf(model, subset);
    const double cdf = lugannani_rice_cdf(sum_cgf, f.x0);
    out << "cdf = " << fmt("%.12g", cdf) << "\n";
    out << "upper_tail = " << fmt("%.12g", 1.0 - cdf) << "\n";
    return;
  }
  const std::vector<double> thresholds = parse_double_list(f.thresholds);
  if (thresholds.empty()) {
    throw InputError("give either --x0 (sum tail) or --thresholds (joint tail)");
  }
  const std::vector<int> subset = subset_or_all(f.subset, model.dimension());
  if (thresholds.size() != subset.size()) {
    throw InputError("--thresholds length must match the coordinate count");
  }
  const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(
      thresholds.data(), static_cast<Eigen::Index>(thresholds.size()));
  const TailProbResult result = tail_prob_marginal(model, subset, t);
  out << "tail_probability = " << fmt("%.12g", result.value) << "\n";
  out << "error_estimate = " << fmt("%.3g", result.error_estimate) << "\n";
}

void cmd_approx_quantile(const RunConfig& cfg, const Flags& f,
                         std::ostream& out) {
  const ModelDocument doc = load_model_document(cfg);
  const EllipticalCgf model = effective_model(doc);
  const std::vector<double> levels = parse_double_list(f.levels);
  if (levels.empty()) {
    throw InputError("--levels is required (percent, open interval (0, 100))");
  }
  const std::vector<int> subset = subset_or_all(f.subset, model.dimension());
  const double k1 = sum_cumulants(model, subset, 1);
  const double k2 = sum_cumulants(model, subset, 2);
  const double k3 = sum_cumulants(model, subset, 3);
  const double k4 = model.coefficient_count() >= 2
                        ? sum_cumulants(model, subset, 4)
                        : 0.0;
  for (double level : levels) {
    const double q = cornish_fisher_quantile(k1, k2, k3, k4, level / 100.0);
    out << "quantile[" << fmt("%g", level) << "%] = " << fmt("%.12g", q)
        << "\n";
  }
}

void cmd_approx_entropy(const RunConfig& cfg, const Flags& f,
                        std::ostream& out) {
  const ModelDocument doc = load_model_document(cfg);
  const EllipticalCgf model = effective_model(doc);
  const std::vector<int> subset = subset_or_all(f.subset, model.dimension());
  const EllipticalCgf sub = model.marginal(subset);
  if (sub.coeffs().size() < 1 || sub.coeffs()[0] <= 0.0) {
    throw InputError("model needs a positive leading coefficient for entropy");
  }
  const Eigen::MatrixXd cov = sub.coeffs()[0] * sub.Gamma();
  const CumulantTensor zero_skew(sub.dimension(), 3);
  const double h = entropy_approx(cov, zero_skew);
  out << "entropy = " << fmt("%.12g", h) << "\n";
  out << "skew_correction = 0 (symmetric family)\n";
}

void cmd_lancaster(const RunConfig& cfg, const Flags& f, const CLI::App& cmd,
                   std::ostream& out) {
  const CsvTable table = load_data(cfg);
  const EmpiricalOracle oracle(table.data);
  const auto gave = [&cmd](const char* name) {
    const CLI::Option* opt = cmd.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  bool did_something = false;
  if (gave("--at")) {
    const std::vector<double> at = parse_double_list(f.at);
    if (static_cast<Eigen::Index>(at.size()) != table.data.cols()) {
      throw InputError("--at length must match the column count");
    }
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(
        at.data(), static_cast<Eigen::Index>(at.size()));
    out << "interaction = " << fmt("%.12g", lancaster_measure(oracle, x))
        << "\n";
    did_something = true;
  }
  if (gave("--hoeffding")) {
    if (table.data.cols() != 2) {
      throw InputError("--hoeffding needs exactly two selected columns");
    }
    GridSpec grid;
    grid.lower.resize(2);
    grid.upper.resize(2);
    for (Eigen::Index c = 0; c < 2; ++c) {
      const double lo = table.data.col(c).minCoeff();
      const double hi = table.data.col(c).maxCoeff();
      const double pad = 0.01 * (hi - lo) + 1e-6 * (1.0 + std::abs(hi));
      grid.lower[c] = lo - pad;
      grid.upper[c] = hi + pad;
    }
    grid.nodes = static_cast<int>(f.nodes);
    const QuadratureResult result =
        cumulant_via_lancaster_integral(oracle, grid);
    const Eigen::VectorXd a = table.data.col(0);
    const Eigen::VectorXd b = table.data.col(1);
    const double plug_in = ((a.array() - a.mean()) * (b.array() - b.mean()))
                               .mean();
    out << "hoeffding_integral = " << fmt("%.12g", result.value) << "\n";
    out << "error_estimate = " << fmt("%.3g", result.error_estimate) << "\n";
    out << "plug_in_covariance = " << fmt("%.12g", plug_in) << "\n";
  }
  if (!did_something && !gave("--hoeffding")) {
    throw InputError("give --at and/or --hoeffding");
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"cgf-lab: cumulant generating function models of joint "
               "dependence"};
  app.require_subcommand(1);
  Flags f;

  const auto add_config = [&f](CLI::App* cmd) {
    cmd->add_option("--config", f.config, "JSON config file; flags override");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "Summarize a CSV dataset");
  add_config(ingest);
  ingest->add_option("input,--input", f.input, "CSV file");
  ingest->add_option("--columns", f.columns, "Column indices, e.g. 0,1,2");
  ingest->callback([&] { cmd_ingest(build_config(*ingest, f), out); });

  CLI::App* fit = app.add_subcommand(
      "fit", "Estimate scale matrix, coefficients, and mixing distribution");
  add_config(fit);
  fit->add_option("--input", f.input, "CSV file");
  fit->add_option("--columns", f.columns, "Column indices");
  fit->add_option("--orders", f.orders, "Even sum-cumulant orders, e.g. 2,4,6");
  fit->add_option("--components", f.components, "Mixture component count");
  fit->add_option("--output", f.output, "Output directory");
  fit->callback([&] { cmd_fit(build_config(*fit, f), out); });

  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo replicates of the model");
  add_config(simulate);
  simulate->add_option("--model", f.model, "model.json path");
  simulate->add_option("--n", f.n, "Observations per replicate");
  simulate->add_option("--replicates", f.replicates, "Replicate count");
  simulate->add_option("--seed", f.seed, "RNG seed (required)");
  simulate->add_option("--output", f.output, "Output directory");
  simulate->add_flag("--emit-samples", f.emit_samples,
                     "Also write the first replicate's sample matrix");
  simulate->callback([&] { cmd_simulate(build_config(*simulate, f), out); });

  CLI::App* report = app.add_subcommand(
      "report", "Quantile bands and block-maxima bands against observed data");
  add_config(report);
  report->add_option("--model", f.model, "model.json path");
  report->add_option("--input", f.input, "Observed CSV file");
  report->add_option("--columns", f.columns, "Column indices");
  report->add_option("--n", f.n, "Observations per replicate");
  report->add_option("--replicates", f.replicates, "Replicate count");
  report->add_option("--seed", f.seed, "RNG seed (required)");
  report->add_option("--block", f.block, "Block length for maxima");
  report->add_option("--levels", f.levels, "Quantile levels in percent");
  report->add_option("--output", f.output, "Output directory");
  report->add_flag("--csv-only", f.csv_only, "Skip report.txt");
  report->callback([&] { cmd_report(build_config(*report, f), out); });

  CLI::App* approx =
      app.add_subcommand("approx", "Analytic approximations from a model");
  approx->require_subcommand(1);

  CLI::App* density = approx->add_subcommand(
      "density", "Saddlepoint density at a point");
  add_config(density);
  density->add_option("--model", f.model, "model.json path");
  density->add_option("--at", f.at, "Evaluation point, e.g. 0.1,0.2");
  density->add_option("--subset", f.subset, "Coordinate subset");
  density->add_option("--groups", f.groups, "Aggregation groups, e.g. 0,1;2,3");
  density->callback(
      [&] { cmd_approx_density(build_config(*density, f), f, out); });

  CLI::App* tail = approx->add_subcommand(
      "tail", "Sum tail CDF (Lugannani-Rice) or joint marginal tail");
  add_config(tail);
  tail->add_option("--model", f.model, "model.json path");
  tail->add_option("--subset", f.subset, "Coordinate subset");
  tail->add_option("--x0", f.x0, "Threshold for the subset sum");
  tail->add_option("--thresholds", f.thresholds,
                   "Per-coordinate thresholds for a joint upper tail");
  tail->callback(
      [&] { cmd_approx_tail(build_config(*tail, f), f, *tail, out); });

  CLI::App* quantile = approx->add_subcommand(
      "quantile", "Cornish-Fisher quantiles of a subset sum");
  add_config(quantile);
  quantile->add_option("--model", f.model, "model.json path");
  quantile->add_option("--subset", f.subset, "Coordinate subset");
  quantile->add_option("--levels", f.levels, "Levels in percent, e.g. 50,99");
  quantile->callback(
      [&] { cmd_approx_quantile(build_config(*quantile, f), f, out); });

  CLI::App* entropy = approx->add_subcommand(
      "entropy", "Entropy approximation of a marginal");
  add_config(entropy);
  entropy->add_option("--model", f.model, "model.json path");
  entropy->add_option("--subset", f.subset, "Coordinate subset");
  entropy->callback(
      [&] { cmd_approx_entropy(build_config(*entropy, f), f, out); });

  CLI::App* lancaster = app.add_subcommand(
      "lancaster", "Interaction measure and Hoeffding integral on data");
  add_config(lancaster);
  lancaster->add_option("--input", f.input, "CSV file");
  lancaster->add_option("--columns", f.columns, "Column indices");
  lancaster->add_option("--at", f.at, "Point for the interaction measure");
  lancaster->add_flag("--hoeffding",
                      "Integrate the interaction over the data hull");
  lancaster->add_option("--nodes", f.nodes, "Quadrature nodes per axis");
  lancaster->callback(
      [&] { cmd_lancaster(build_config(*lancaster, f), f, *lancaster, out); });

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("cgf-lab");
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return 1;
  } catch (const FitError& e) {
    err << "fit error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace cgflab::cli
