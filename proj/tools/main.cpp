// Command line front end: moment estimation, block construction, realized
// radial series extraction, and simulation studies over CSV/JSON wire formats.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ellmom/blocks.hpp"
#include "ellmom/elliptical.hpp"
#include "ellmom/estimators.hpp"
#include "ellmom/harness.hpp"
#include "ellmom/io.hpp"
#include "ellmom/realized_xi.hpp"
#include "ellmom/rng.hpp"
#include "ellmom/robust.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

// Free-shape numeric CSV holding exactly p values: one row, one column, or
// anything in between.
Eigen::VectorXd read_vector_csv(const std::string& path, int p) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        while (used < field.size() &&
               (field[used] == ' ' || field[used] == '\t'))
          ++used;
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ": bad numeric field '" + field + "'");
      }
    }
  }
  if (static_cast<int>(values.size()) != p)
    throw std::invalid_argument("--mu must hold exactly p values");
  return Eigen::Map<Eigen::VectorXd>(values.data(), p);
}

std::vector<double> parse_tau_grid(const std::string& text) {
  // lo:hi:steps, log spaced
  std::stringstream ss(text);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() != 3)
    throw std::invalid_argument("--tau-grid expects lo:hi:steps");
  return ellmom::log_spaced_grid(std::stod(parts[0]), std::stod(parts[1]),
                                 std::stoi(parts[2]));
}

struct EstimateArgs {
  std::string input;
  std::string method;
  int m = 2;
  std::string blocks_path;
  bool robust = false;
  double ci_alpha = 0.0;
  bool have_ci = false;
  int j = 1;
  std::string mu_path;
  std::string sigma_path;
  std::string tau_grid;
  int cv_folds = 5;
  std::uint64_t seed = 0;
};

int run_estimate(const EstimateArgs& args) {
  using namespace ellmom;
  SampleMatrix samples(read_samples_csv(args.input));
  const int n = samples.n();
  const int p = samples.p();
  MomentOrder m(args.m);

  std::optional<Eigen::MatrixXd> sigma;
  if (!args.sigma_path.empty()) {
    sigma = read_covariance_csv(args.sigma_path);
    if (sigma->rows() != p)
      throw std::invalid_argument("--sigma dimension does not match the data");
  }
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(p);
  if (!args.mu_path.empty()) mu = read_vector_csv(args.mu_path, p);

  std::optional<BlockCollection> blocks;
  if (!args.blocks_path.empty())
    blocks.emplace(read_blocks_json(args.blocks_path, p), p,
                   "file(" + args.blocks_path + ")");

  HuberConfig huber;
  huber.cv_folds = args.cv_folds;
  if (!args.tau_grid.empty()) huber.tau_grid = parse_tau_grid(args.tau_grid);

  // Location/scale plug-ins: externally supplied truth when --mu/--sigma are
  // given, otherwise sample or robust estimates.
  LocationScale loc;
  RngStream rng(args.seed, 0);
  bool external = sigma.has_value();
  if (external) {
    loc = truth_location_scale(mu, *sigma, blocks ? &*blocks : nullptr);
  } else if (args.robust) {
    loc = robust_location_scale(samples, blocks ? &*blocks : nullptr, huber,
                                rng);
  } else {
    loc = sample_location_scale(samples, blocks ? &*blocks : nullptr);
  }

  MomentEstimate est;
  est.m = args.m;
  est.n_used = n;
  if (args.method == "ie") {
    if (!sigma)
      throw std::invalid_argument(
          "--method ie needs --sigma (and optionally --mu); inverting a "
          "sample covariance is only sound for n well above p");
    EllipticalSpec spec(mu, *sigma, GaussianRadial{});
    est.method = EstimatorMethod::Ideal;
    est.value = ideal_estimator(samples, mu, spec.omega(), m);
  } else if (args.method == "marginal") {
    if (args.j < 1 || args.j > p)
      throw std::invalid_argument("--j must be in [1, p]");
    int j = args.j - 1;
    est.method = EstimatorMethod::Marginal;
    est.coordinate = args.j;
    est.value = marginal_estimator(samples, j, loc.mu(j), loc.sigma_diag(j), m);
    if (args.have_ci) {
      double theta_m = mae_estimator(samples, loc, m);
      double theta_2m = mae_estimator(samples, loc, MomentOrder(2 * args.m));
      est.ci = marginal_confidence_interval(samples, j, loc.mu(j),
                                            loc.sigma_diag(j), m, theta_m,
                                            theta_2m, args.ci_alpha);
    }
  } else if (args.method == "mae") {
    est.method = EstimatorMethod::MAE;
    est.value = mae_estimator(samples, loc, m);
  } else if (args.method == "bae") {
    if (!blocks)
      throw std::invalid_argument("--method bae needs --blocks");
    est.method = EstimatorMethod::BAE;
    est.value = bae_estimator(samples, *blocks, loc, m);
  } else {
    throw std::invalid_argument("--method must be ie, marginal, mae, or bae");
  }
  if (args.have_ci && args.method != "marginal")
    throw std::invalid_argument("--ci is only defined for --method marginal");
  est.validate();

  nlohmann::json out;
  out["method"] = args.method;
  out["m"] = args.m;
  out["value"] = est.value;
  if (est.ci) {
    out["ci"] = {est.ci->lower, est.ci->upper};
  } else {
    out["ci"] = nullptr;
  }
  out["n"] = n;
  out["p"] = p;
  std::cout << out.dump() << '\n';
  return kExitOk;
}

int run_blocks(const std::string& input, const std::string& method, double t,
               std::int64_t count, std::uint64_t seed,
               const std::string& out_path) {
  using namespace ellmom;
  Eigen::MatrixXd sigma = read_covariance_csv(input);
  std::optional<BlockCollection> blocks;
  if (method == "threshold") {
    blocks = threshold_blocks(sigma, t);
  } else if (method == "pairs") {
    RngStream rng(seed, 0);
    blocks = random_pair_blocks(static_cast<int>(sigma.rows()), count, rng);
  } else {
    throw std::invalid_argument("--method must be threshold or pairs");
  }
  std::string text = blocks_to_json_text(blocks->blocks());
  if (out_path.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << text << '\n';
  }
  return kExitOk;
}

struct XiArgs {
  std::string returns_path;
  std::string factors_path;
  int pca = 0;
  int arch_order = 2;
  int smooth = 0;
  std::string demean = "zero";
  int window = 0;
  std::string out_path;
};

int run_xi(const XiArgs& args) {
  using namespace ellmom;
  Panel returns = read_panel_csv(args.returns_path);
  PanelSeries panel;
  panel.returns = returns.values;
  panel.dates = returns.dates;

  XiPipelineOptions options;
  options.arch_order = args.arch_order;
  options.smooth_window = args.smooth;
  if (args.demean == "zero") {
    options.demean_mode = DemeanMode::Zero;
  } else if (args.demean == "window") {
    options.demean_mode = DemeanMode::Window;
    options.demean_window = args.window;
  } else {
    throw std::invalid_argument("--demean must be zero or window");
  }
  if (!args.factors_path.empty() && args.pca > 0)
    throw std::invalid_argument("--factors and --pca are mutually exclusive");
  if (!args.factors_path.empty()) {
    Panel factors = read_panel_csv(args.factors_path);
    if (factors.dates != returns.dates)
      throw std::invalid_argument(
          "factor panel dates do not match the returns panel");
    panel.factors = factors.values;
    options.factor_mode = XiPipelineOptions::Factors::Observed;
  } else if (args.pca > 0) {
    options.factor_mode = XiPipelineOptions::Factors::Pca;
    options.pca_k = args.pca;
  }

  RealizedXiSeries series = realized_xi_pipeline(panel, options);
  for (const auto& flag : series.flags)
    std::cerr << "warning: " << flag << '\n';

  std::ofstream out(args.out_path);
  if (!out) throw std::runtime_error("cannot write '" + args.out_path + "'");
  out << "date,xi_sq,xi_sq_smoothed\n";
  for (int i = 0; i < series.xi_sq.size(); ++i) {
    std::string date = series.dates.empty()
                           ? std::to_string(series.start_index + i + 1)
                           : series.dates[static_cast<std::size_t>(i)];
    out << date << ',' << format_double(series.xi_sq(i)) << ','
        << format_double(series.xi_sq_smoothed(i)) << '\n';
  }
  return kExitOk;
}

int run_simulate(const std::string& config_path, const std::string& out_path,
                 int workers, const std::string& format,
                 const std::string& summary_path) {
  using namespace ellmom;
  ExperimentConfig config = load_config(config_path);
  auto records = run_experiment(config, workers);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  if (format == "csv") {
    emit_csv(records, out);
  } else if (format == "jsonl") {
    emit_jsonl(records, out);
  } else {
    throw std::invalid_argument("--format must be csv or jsonl");
  }
  if (!summary_path.empty()) {
    std::ofstream sum(summary_path);
    if (!sum) throw std::runtime_error("cannot write '" + summary_path + "'");
    write_summary_csv(summarize(records), sum);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scaled even-moment estimation for elliptical data"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* cmd_est = app.add_subcommand(
      "estimate", "Estimate theta_m from a sample CSV (header y1,...,yp)");
  cmd_est->add_option("--input", est.input, "Sample CSV")->required();
  cmd_est->add_option("--method", est.method, "ie | marginal | mae | bae")
      ->required();
  cmd_est->add_option("--m", est.m, "Moment order")->required();
  cmd_est->add_option("--blocks", est.blocks_path, "Blocks JSON (for bae)");
  cmd_est->add_flag("--robust", est.robust,
                    "Huber plug-ins with cross-validated tau");
  auto* ci_opt = cmd_est->add_option(
      "--ci", est.ci_alpha, "Two-sided interval level alpha (marginal only)");
  cmd_est->add_option("--j", est.j, "Coordinate for --method marginal, 1-based");
  cmd_est->add_option("--mu", est.mu_path, "External location CSV (p values)");
  cmd_est->add_option("--sigma", est.sigma_path,
                      "External covariance CSV (square, no header)");
  cmd_est->add_option("--tau-grid", est.tau_grid,
                      "lo:hi:steps, log spaced (default: data-driven)");
  cmd_est->add_option("--cv-folds", est.cv_folds, "CV folds (default 5)");
  cmd_est->add_option("--seed", est.seed, "Seed for CV fold shuffles");

  std::string blk_input, blk_method, blk_out;
  double blk_t = 0.0;
  std::int64_t blk_count = 0;
  std::uint64_t blk_seed = 0;
  auto* cmd_blk = app.add_subcommand(
      "blocks", "Build a block collection from a covariance CSV");
  cmd_blk->add_option("--input", blk_input, "Covariance CSV")->required();
  cmd_blk->add_option("--method", blk_method, "threshold | pairs")->required();
  auto* blk_t_opt =
      cmd_blk->add_option("--t", blk_t, "Correlation threshold");
  cmd_blk->add_option("--count", blk_count, "Number of random pairs");
  cmd_blk->add_option("--seed", blk_seed, "Seed for pair draws");
  cmd_blk->add_option("--out", blk_out, "Output path (default stdout)");

  XiArgs xi;
  auto* cmd_xi = app.add_subcommand(
      "xi", "Extract the realized radial series from a return panel");
  cmd_xi->add_option("--returns", xi.returns_path, "Panel CSV (date,y1,...)")
      ->required();
  cmd_xi->add_option("--factors", xi.factors_path, "Observed factor panel CSV");
  cmd_xi->add_option("--pca", xi.pca, "Number of principal component factors");
  cmd_xi->add_option("--arch-order", xi.arch_order, "ARCH order (default 2)");
  cmd_xi->add_option("--smooth", xi.smooth, "Centered smoothing window");
  cmd_xi->add_option("--demean", xi.demean, "zero | window (default zero)");
  cmd_xi->add_option("--window", xi.window, "Trailing window for --demean window");
  cmd_xi->add_option("--out", xi.out_path, "Output CSV")->required();

  std::string sim_config, sim_out, sim_format = "csv", sim_summary;
  int sim_workers = 1;
  auto* cmd_sim = app.add_subcommand(
      "simulate", "Run a simulation study from a flat key-value config");
  cmd_sim->add_option("--config", sim_config, "Config file")->required();
  cmd_sim->add_option("--out", sim_out, "Results path")->required();
  cmd_sim->add_option("--workers", sim_workers, "Worker threads (default 1)");
  cmd_sim->add_option("--format", sim_format, "csv | jsonl (default csv)");
  cmd_sim->add_option("--summary", sim_summary, "Also write a summary CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (cmd_est->parsed()) {
      est.have_ci = ci_opt->count() > 0;
      return run_estimate(est);
    }
    if (cmd_blk->parsed()) {
      if (blk_method == "threshold" && blk_t_opt->count() == 0)
        throw std::invalid_argument("--method threshold needs --t");
      return run_blocks(blk_input, blk_method, blk_t, blk_count, blk_seed,
                        blk_out);
    }
    if (cmd_xi->parsed()) return run_xi(xi);
    if (cmd_sim->parsed())
      return run_simulate(sim_config, sim_out, sim_workers, sim_format,
                          sim_summary);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
