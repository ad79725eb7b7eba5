#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ellmom/radial.hpp"
#include "ellmom/robust.hpp"

namespace ellmom {

// Flat key-value experiment description. See parse_config_text for the key
// set and value grammar.
struct ExperimentConfig {
  std::string scenario;
  RadialFamily family = GaussianRadial{};
  std::string cov_kind;      // identity | banded | block_diag | file
  double cov_banded_a = 0.0;
  int cov_block_size = 0;
  double cov_block_rho = 0.0;
  std::string cov_path;
  std::vector<int> n_grid;
  std::vector<int> p_grid;
  int m = 2;
  std::vector<std::string> estimators;  // ie, marginal, mae, bae, *_hat
  int replicates = 0;
  std::uint64_t seed = 0;
  bool robust = false;
  std::string blocks_method;  // aligned | pairs | threshold | empty
  double blocks_param = 0.0;
  // When set, each replicate also evaluates the two-sided interval around the
  // marginal estimator and the summary reports coverage. The carrier is the
  // known-inputs marginal row, or the robust marginal_hat row when robust is
  // on; either is appended to the estimator list if missing.
  std::optional<double> ci_alpha;
  HuberConfig huber;
};

// Throws std::invalid_argument with a line-tagged message on any problem.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct ReplicateRecord {
  std::string scenario;
  int n = 0;
  int p = 0;
  int rep = 0;  // 0-based replicate id
  std::string estimator;
  double theta_hat = 0.0;
  double theta_true = 0.0;
  double sq_err = 0.0;
  std::optional<bool> ci_hit;
  std::uint64_t seed = 0;  // master seed
  double wall_seconds = 0.0;
  bool failed = false;
  std::string error;
};

// Runs every (n, p) cell for every replicate. Replicates execute on `workers`
// threads; each replicate derives its own counter-based stream, so the record
// stream is byte-identical for any worker count.
std::vector<ReplicateRecord> run_experiment(const ExperimentConfig& config,
                                            int workers = 1);

struct SummaryRow {
  std::string scenario;
  int n = 0;
  int p = 0;
  std::string estimator;
  int replicates = 0;
  int failures = 0;
  double mean_theta_hat = 0.0;
  double theta_true = 0.0;
  double mse = 0.0;
  double mse_se = 0.0;       // Monte Carlo standard error of the MSE
  double mse_np_rel = 0.0;   // MSE * n * p / theta_true^2
  std::optional<double> coverage;
};

std::vector<SummaryRow> summarize(const std::vector<ReplicateRecord>& records);

// Pinned column order:
// scenario,n,p,rep,estimator,theta_hat,theta_true,sq_err,ci_hit,seed
// Floats carry 17 significant digits so parsing them back is bit-exact.
void emit_csv(const std::vector<ReplicateRecord>& records, std::ostream& out);
void emit_jsonl(const std::vector<ReplicateRecord>& records, std::ostream& out);
std::vector<ReplicateRecord> parse_results_csv(std::istream& in);

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);

}  // namespace ellmom
