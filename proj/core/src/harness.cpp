#include "ellmom/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ellmom/blocks.hpp"
#include "ellmom/elliptical.hpp"
#include "ellmom/estimators.hpp"
#include "ellmom/io.hpp"
#include "ellmom/rng.hpp"
#include "ellmom/special.hpp"

namespace ellmom {

namespace {

const std::vector<std::string> kKnownTokens = {
    "ie", "marginal", "mae", "bae", "marginal_hat", "mae_hat", "bae_hat"};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value for '" + key +
                                "': '" + s + "'");
  }
}

long long to_int(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer value for '" + key +
                                "': '" + s + "'");
  }
}

RadialFamily parse_family(const std::string& value) {
  if (value == "gaussian") return GaussianRadial{};
  if (value.rfind("student_t(", 0) == 0 && value.back() == ')') {
    double nu = to_double(value.substr(10, value.size() - 11), "family");
    if (!(nu > 2.0))
      throw std::invalid_argument("config: student_t needs nu > 2");
    return StudentTRadial{nu};
  }
  throw std::invalid_argument(
      "config: family must be 'gaussian' or 'student_t(<nu>)', got '" + value +
      "'");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key or value");
    if (kv.count(key))
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    kv[key] = value;
  }

  const std::vector<std::string> known = {
      "scenario",      "family",       "cov.kind",       "cov.param",
      "n_grid",        "p_grid",       "m",              "estimators",
      "R",             "seed",         "robust",         "blocks.method",
      "blocks.param",  "ci.alpha",     "robust.cv_folds", "robust.tau_lo",
      "robust.tau_hi", "robust.tau_steps"};
  for (const auto& [key, value] : kv) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  auto require = [&kv](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw std::invalid_argument("config: missing required key '" + key + "'");
    return it->second;
  };

  ExperimentConfig config;
  config.scenario = require("scenario");
  config.family = parse_family(require("family"));
  config.cov_kind = require("cov.kind");
  if (config.cov_kind == "identity") {
    // no parameter
  } else if (config.cov_kind == "banded") {
    config.cov_banded_a = to_double(require("cov.param"), "cov.param");
  } else if (config.cov_kind == "block_diag") {
    auto parts = split_list(require("cov.param"));
    if (parts.size() != 2)
      throw std::invalid_argument(
          "config: block_diag cov.param must be '<block_size>,<rho>'");
    config.cov_block_size = static_cast<int>(to_int(parts[0], "cov.param"));
    config.cov_block_rho = to_double(parts[1], "cov.param");
  } else if (config.cov_kind == "file") {
    config.cov_path = require("cov.param");
  } else {
    throw std::invalid_argument("config: cov.kind must be identity, banded, "
                                "block_diag, or file");
  }
  for (const auto& item : split_list(require("n_grid")))
    config.n_grid.push_back(static_cast<int>(to_int(item, "n_grid")));
  for (const auto& item : split_list(require("p_grid")))
    config.p_grid.push_back(static_cast<int>(to_int(item, "p_grid")));
  if (config.n_grid.empty() || config.p_grid.empty())
    throw std::invalid_argument("config: n_grid and p_grid must be nonempty");
  for (int n : config.n_grid)
    if (n < 1) throw std::invalid_argument("config: n_grid entries must be >= 1");
  for (int p : config.p_grid)
    if (p < 1) throw std::invalid_argument("config: p_grid entries must be >= 1");
  config.m = static_cast<int>(to_int(require("m"), "m"));
  if (config.m < 1) throw std::invalid_argument("config: m must be >= 1");
  config.estimators = split_list(require("estimators"));
  if (config.estimators.empty())
    throw std::invalid_argument("config: estimators must be nonempty");
  for (const auto& token : config.estimators) {
    if (std::find(kKnownTokens.begin(), kKnownTokens.end(), token) ==
        kKnownTokens.end())
      throw std::invalid_argument("config: unknown estimator '" + token + "'");
  }
  config.replicates = static_cast<int>(to_int(require("R"), "R"));
  if (config.replicates < 1)
    throw std::invalid_argument("config: R must be >= 1");
  config.seed = static_cast<std::uint64_t>(to_int(require("seed"), "seed"));
  if (kv.count("robust")) {
    const std::string& v = kv.at("robust");
    if (v == "true") config.robust = true;
    else if (v == "false") config.robust = false;
    else throw std::invalid_argument("config: robust must be true or false");
  }
  bool needs_blocks = false;
  for (const auto& token : config.estimators)
    if (token == "bae" || token == "bae_hat") needs_blocks = true;
  if (kv.count("blocks.method")) {
    config.blocks_method = kv.at("blocks.method");
    if (config.blocks_method != "aligned" && config.blocks_method != "pairs" &&
        config.blocks_method != "threshold")
      throw std::invalid_argument(
          "config: blocks.method must be aligned, pairs, or threshold");
    config.blocks_param = to_double(require("blocks.param"), "blocks.param");
  } else if (needs_blocks) {
    throw std::invalid_argument(
        "config: bae estimators require blocks.method and blocks.param");
  }
  if (kv.count("ci.alpha")) {
    double alpha = to_double(kv.at("ci.alpha"), "ci.alpha");
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw std::invalid_argument("config: ci.alpha must be in (0, 1]");
    config.ci_alpha = alpha;
  }
  if (kv.count("robust.cv_folds"))
    config.huber.cv_folds =
        static_cast<int>(to_int(kv.at("robust.cv_folds"), "robust.cv_folds"));
  if (kv.count("robust.tau_lo") || kv.count("robust.tau_hi") ||
      kv.count("robust.tau_steps")) {
    double lo = to_double(require("robust.tau_lo"), "robust.tau_lo");
    double hi = to_double(require("robust.tau_hi"), "robust.tau_hi");
    int steps = static_cast<int>(
        to_int(require("robust.tau_steps"), "robust.tau_steps"));
    config.huber.tau_grid = log_spaced_grid(lo, hi, steps);
  }
  validate_huber_config(config.huber);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

namespace {

struct CellPlan {
  int n = 0;
  int p = 0;
  std::size_t cell_index = 0;
  EllipticalSpec spec;
  double theta_true = 0.0;
  std::optional<BlockCollection> fixed_blocks;  // aligned, or threshold of truth
  LocationScale truth_loc;                      // with fixed true-input blocks
};

Eigen::MatrixXd build_covariance(const ExperimentConfig& config, int p) {
  if (config.cov_kind == "identity") return covariance_identity(p);
  if (config.cov_kind == "banded") return covariance_banded(p, config.cov_banded_a);
  if (config.cov_kind == "block_diag")
    return covariance_block_diag(p, config.cov_block_size, config.cov_block_rho);
  Eigen::MatrixXd sigma = covariance_from_file(config.cov_path);
  if (sigma.rows() != p)
    throw std::invalid_argument(
        "config: covariance file dimension does not match p_grid entry " +
        std::to_string(p));
  return sigma;
}

BlockCollection aligned_blocks(int p, int k) {
  if (k < 1 || k > p)
    throw std::invalid_argument("blocks: aligned size must be in [1, p]");
  std::vector<std::vector<int>> blocks;
  for (int start = 0; start < p; start += k) {
    std::vector<int> block;
    for (int j = start; j < std::min(start + k, p); ++j) block.push_back(j);
    blocks.push_back(std::move(block));
  }
  return BlockCollection(std::move(blocks), p,
                         "aligned(k=" + std::to_string(k) + ")");
}

// Covariance estimate used by *_hat estimators and threshold blocks.
Eigen::MatrixXd hat_covariance(const SampleMatrix& samples,
                               const LocationScale& loc_hat, bool robust,
                               const HuberConfig& huber, RngStream& rng) {
  const int p = samples.p();
  Eigen::MatrixXd cov(p, p);
  cov.diagonal() = loc_hat.sigma_diag;
  if (!robust) {
    Eigen::MatrixXd centered =
        samples.data.rowwise() - loc_hat.mu.transpose();
    Eigen::MatrixXd full =
        (centered.transpose() * centered) / static_cast<double>(samples.n());
    full.diagonal() = loc_hat.sigma_diag;
    return full;
  }
  for (int a = 0; a < p; ++a) {
    for (int b = a + 1; b < p; ++b) {
      Eigen::VectorXd prod =
          samples.data.col(a).cwiseProduct(samples.data.col(b));
      double tau = cross_validate_tau(prod, huber, rng);
      double value = huber_covariance(samples.data.col(a), samples.data.col(b),
                                      loc_hat.mu(a), loc_hat.mu(b), tau, huber);
      cov(a, b) = value;
      cov(b, a) = value;
    }
  }
  return cov;
}

void attach_blocks(LocationScale& loc, const BlockCollection& blocks,
                   const Eigen::MatrixXd& cov) {
  for (const auto& block : blocks.blocks()) {
    const int k = static_cast<int>(block.size());
    Eigen::MatrixXd sub(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) sub(a, b) = cov(block[a], block[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sub,
                                                          Eigen::EigenvaluesOnly);
    double lambda_min = solver.eigenvalues().minCoeff();
    if (lambda_min <= 0.0) {
      sub.diagonal().array() += std::abs(lambda_min) + 1e-8;
      loc.flags.push_back("block repaired by diagonal loading");
    }
    loc.add_block(block, std::move(sub));
  }
}

}  // namespace

std::vector<ReplicateRecord> run_experiment(const ExperimentConfig& config,
                                            int workers) {
  const MomentOrder m(config.m);
  bool want_ci = config.ci_alpha.has_value();
  // The interval is anchored to the marginal estimator whose inputs the run
  // actually trusts: known (mu, sigma_jj) by default, the robust estimates
  // when robust is on. A sample-moment center is deliberately not a carrier;
  // dividing by the sample variance shrinks the center's spread well below
  // the nominal width and the reported coverage saturates near 1.
  const std::string ci_token = config.robust ? "marginal_hat" : "marginal";
  bool any_hat = want_ci && config.robust;
  bool bae_true = false;
  bool bae_hat = false;
  for (const auto& token : config.estimators) {
    if (token.size() > 4 && token.substr(token.size() - 4) == "_hat")
      any_hat = true;
    if (token == "bae") bae_true = true;
    if (token == "bae_hat") bae_hat = true;
  }
  // Every emitted token, in order; the CI carrier is appended when absent.
  std::vector<std::string> tokens = config.estimators;
  if (want_ci &&
      std::find(tokens.begin(), tokens.end(), ci_token) == tokens.end())
    tokens.push_back(ci_token);

  // Cell plans are deterministic and shared across replicates.
  std::vector<CellPlan> cells;
  std::size_t cell_index = 0;
  for (int n : config.n_grid) {
    for (int p : config.p_grid) {
      Eigen::MatrixXd sigma = build_covariance(config, p);
      EllipticalSpec spec(Eigen::VectorXd::Zero(p), sigma, config.family);
      std::optional<BlockCollection> fixed;
      if (config.blocks_method == "aligned") {
        fixed = aligned_blocks(p, static_cast<int>(config.blocks_param));
      } else if (config.blocks_method == "threshold" && bae_true) {
        fixed = threshold_blocks(sigma, config.blocks_param);
      }
      LocationScale truth = truth_location_scale(
          spec.mu(), spec.sigma(),
          (bae_true && fixed) ? &*fixed : nullptr);
      double theta_true = theoretical_theta(config.family, p, m);
      cells.push_back(CellPlan{n, p, cell_index, std::move(spec), theta_true,
                               std::move(fixed), std::move(truth)});
      ++cell_index;
    }
  }

  const std::size_t reps = static_cast<std::size_t>(config.replicates);
  const std::size_t per_rep = tokens.size();
  const std::size_t total_jobs = cells.size() * reps;
  std::vector<ReplicateRecord> records(total_jobs * per_rep);

  auto run_job = [&](std::size_t job) {
    const CellPlan& cell = cells[job / reps];
    const int rep = static_cast<int>(job % reps);
    ReplicateRecord* out = records.data() + job * per_rep;
    auto start = std::chrono::steady_clock::now();

    RngStream stream(config.seed,
                     (static_cast<std::uint64_t>(cell.cell_index) << 32) |
                         static_cast<std::uint64_t>(rep));

    for (std::size_t t = 0; t < per_rep; ++t) {
      out[t].scenario = config.scenario;
      out[t].n = cell.n;
      out[t].p = cell.p;
      out[t].rep = rep;
      out[t].estimator = tokens[t];
      out[t].theta_true = cell.theta_true;
      out[t].seed = config.seed;
    }

    try {
      SampleMatrix samples = sample(cell.spec, cell.n, stream);

      // Per-replicate block draw, when configured.
      std::optional<BlockCollection> rep_blocks;
      if (config.blocks_method == "pairs" && (bae_true || bae_hat))
        rep_blocks = random_pair_blocks(
            cell.p, static_cast<std::int64_t>(config.blocks_param), stream);

      std::optional<LocationScale> truth_rep;  // truth with pair blocks
      if (bae_true && rep_blocks)
        truth_rep = truth_location_scale(cell.spec.mu(), cell.spec.sigma(),
                                         &*rep_blocks);

      std::optional<LocationScale> loc_hat;
      std::optional<BlockCollection> hat_blocks;
      if (any_hat) {
        if (config.robust) {
          loc_hat = robust_location_scale(samples, nullptr, config.huber,
                                          stream);
        } else {
          loc_hat = sample_location_scale(samples, nullptr);
        }
        if (bae_hat) {
          Eigen::MatrixXd cov = hat_covariance(samples, *loc_hat,
                                               config.robust, config.huber,
                                               stream);
          if (config.blocks_method == "aligned")
            hat_blocks = aligned_blocks(cell.p,
                                        static_cast<int>(config.blocks_param));
          else if (config.blocks_method == "pairs")
            hat_blocks = rep_blocks;
          else
            hat_blocks = threshold_blocks(cov, config.blocks_param);
          attach_blocks(*loc_hat, *hat_blocks, cov);
        }
      }

      // Width plug-ins for the interval: MAE at orders m and 2m, built from
      // the same inputs as the carrier's center.
      double ci_plug_m = 0.0;
      double ci_plug_2m = 0.0;
      if (want_ci) {
        const LocationScale& ci_loc =
            config.robust ? *loc_hat : cell.truth_loc;
        ci_plug_m = mae_estimator(samples, ci_loc, m);
        ci_plug_2m = mae_estimator(samples, ci_loc, MomentOrder(2 * config.m));
      }

      for (std::size_t t = 0; t < per_rep; ++t) {
        ReplicateRecord& rec = out[t];
        const std::string& token = tokens[t];
        try {
          double value;
          if (token == "ie") {
            value = ideal_estimator(samples, cell.spec.mu(), cell.spec.omega(),
                                    m);
          } else if (token == "marginal") {
            value = marginal_estimator(samples, 0, cell.spec.mu()(0),
                                       cell.spec.sigma()(0, 0), m);
            if (want_ci && !config.robust) {
              ConfidenceInterval ci = marginal_confidence_interval(
                  samples, 0, cell.spec.mu()(0), cell.spec.sigma()(0, 0), m,
                  ci_plug_m, ci_plug_2m, *config.ci_alpha);
              rec.ci_hit = cell.theta_true >= ci.lower &&
                           cell.theta_true <= ci.upper;
            }
          } else if (token == "mae") {
            value = mae_estimator(samples, cell.truth_loc, m);
          } else if (token == "bae") {
            const BlockCollection& blocks =
                rep_blocks ? *rep_blocks : *cell.fixed_blocks;
            const LocationScale& loc = truth_rep ? *truth_rep : cell.truth_loc;
            value = bae_estimator(samples, blocks, loc, m);
          } else if (token == "marginal_hat") {
            value = marginal_estimator(samples, 0, loc_hat->mu(0),
                                       loc_hat->sigma_diag(0), m);
            if (want_ci && config.robust) {
              ConfidenceInterval ci = marginal_confidence_interval(
                  samples, 0, loc_hat->mu(0), loc_hat->sigma_diag(0), m,
                  ci_plug_m, ci_plug_2m, *config.ci_alpha);
              rec.ci_hit = cell.theta_true >= ci.lower &&
                           cell.theta_true <= ci.upper;
            }
          } else if (token == "mae_hat") {
            value = mae_estimator(samples, *loc_hat, m);
          } else {  // bae_hat
            value = bae_estimator(samples, *hat_blocks, *loc_hat, m);
          }
          rec.theta_hat = value;
          rec.sq_err = (value - cell.theta_true) * (value - cell.theta_true);
        } catch (const std::exception& e) {
          rec.failed = true;
          rec.theta_hat = std::numeric_limits<double>::quiet_NaN();
          rec.sq_err = std::numeric_limits<double>::quiet_NaN();
          rec.error = e.what();
        }
      }
    } catch (const std::exception& e) {
      for (std::size_t t = 0; t < per_rep; ++t) {
        out[t].failed = true;
        out[t].theta_hat = std::numeric_limits<double>::quiet_NaN();
        out[t].sq_err = std::numeric_limits<double>::quiet_NaN();
        out[t].error = e.what();
      }
    }

    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    for (std::size_t t = 0; t < per_rep; ++t) out[t].wall_seconds = elapsed;
  };

  int thread_count = std::max(1, workers);
  if (thread_count == 1) {
    for (std::size_t job = 0; job < total_jobs; ++job) run_job(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int w = 0; w < thread_count; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t job = next.fetch_add(1);
          if (job >= total_jobs) return;
          run_job(job);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<ReplicateRecord>& records) {
  // Group in first-appearance order so output is deterministic.
  std::vector<SummaryRow> rows;
  std::map<std::tuple<std::string, int, int, std::string>, std::size_t> index;
  struct Accum {
    double sum = 0.0;
    double sq_sum = 0.0;
    double sq_sq_sum = 0.0;
    int count = 0;
    int failures = 0;
    int ci_total = 0;
    int ci_hits = 0;
  };
  std::vector<Accum> accums;
  for (const auto& rec : records) {
    auto key = std::make_tuple(rec.scenario, rec.n, rec.p, rec.estimator);
    auto it = index.find(key);
    std::size_t pos;
    if (it == index.end()) {
      pos = rows.size();
      index.emplace(key, pos);
      SummaryRow row;
      row.scenario = rec.scenario;
      row.n = rec.n;
      row.p = rec.p;
      row.estimator = rec.estimator;
      row.theta_true = rec.theta_true;
      rows.push_back(row);
      accums.push_back(Accum{});
    } else {
      pos = it->second;
    }
    Accum& acc = accums[pos];
    if (rec.failed) {
      ++acc.failures;
      continue;
    }
    acc.sum += rec.theta_hat;
    acc.sq_sum += rec.sq_err;
    acc.sq_sq_sum += rec.sq_err * rec.sq_err;
    ++acc.count;
    if (rec.ci_hit) {
      ++acc.ci_total;
      if (*rec.ci_hit) ++acc.ci_hits;
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Accum& acc = accums[i];
    SummaryRow& row = rows[i];
    row.replicates = acc.count + acc.failures;
    row.failures = acc.failures;
    if (acc.count > 0) {
      row.mean_theta_hat = acc.sum / acc.count;
      row.mse = acc.sq_sum / acc.count;
      double var_sq =
          acc.sq_sq_sum / acc.count - row.mse * row.mse;
      row.mse_se = acc.count > 1
                       ? std::sqrt(std::max(var_sq, 0.0) / acc.count)
                       : 0.0;
      row.mse_np_rel = row.mse * row.n * row.p /
                       (row.theta_true * row.theta_true);
    }
    if (acc.ci_total > 0)
      row.coverage = static_cast<double>(acc.ci_hits) / acc.ci_total;
  }
  return rows;
}

namespace {

std::string csv_field(const std::optional<bool>& flag) {
  if (!flag) return "";
  return *flag ? "1" : "0";
}

}  // namespace

void emit_csv(const std::vector<ReplicateRecord>& records, std::ostream& out) {
  out << "scenario,n,p,rep,estimator,theta_hat,theta_true,sq_err,ci_hit,seed\n";
  for (const auto& rec : records) {
    out << rec.scenario << ',' << rec.n << ',' << rec.p << ',' << rec.rep << ','
        << rec.estimator << ',' << format_double(rec.theta_hat) << ','
        << format_double(rec.theta_true) << ',' << format_double(rec.sq_err)
        << ',' << csv_field(rec.ci_hit) << ',' << rec.seed << '\n';
  }
}

void emit_jsonl(const std::vector<ReplicateRecord>& records,
                std::ostream& out) {
  // Non-finite values (failure records) map to null; JSON has no NaN.
  auto number = [](double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
  };
  for (const auto& rec : records) {
    nlohmann::json j;
    j["scenario"] = rec.scenario;
    j["n"] = rec.n;
    j["p"] = rec.p;
    j["rep"] = rec.rep;
    j["estimator"] = rec.estimator;
    j["theta_hat"] = number(rec.theta_hat);
    j["theta_true"] = number(rec.theta_true);
    j["sq_err"] = number(rec.sq_err);
    if (rec.ci_hit) j["ci_hit"] = *rec.ci_hit;
    j["seed"] = rec.seed;
    out << j.dump() << '\n';
  }
}

std::vector<ReplicateRecord> parse_results_csv(std::istream& in) {
  std::vector<ReplicateRecord> records;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("results csv: missing header");
  const std::string expected =
      "scenario,n,p,rep,estimator,theta_hat,theta_true,sq_err,ci_hit,seed";
  if (line != expected)
    throw std::runtime_error("results csv: unexpected header '" + line + "'");
  auto parse_num = [](const std::string& field) {
    if (field == "nan" || field == "-nan")
      return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
      throw std::runtime_error("results csv: bad number '" + field + "'");
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 10)
      throw std::runtime_error("results csv: expected 10 fields");
    ReplicateRecord rec;
    rec.scenario = fields[0];
    rec.n = static_cast<int>(std::stoll(fields[1]));
    rec.p = static_cast<int>(std::stoll(fields[2]));
    rec.rep = static_cast<int>(std::stoll(fields[3]));
    rec.estimator = fields[4];
    rec.theta_hat = parse_num(fields[5]);
    rec.theta_true = parse_num(fields[6]);
    rec.sq_err = parse_num(fields[7]);
    if (!fields[8].empty()) rec.ci_hit = fields[8] == "1";
    rec.seed = static_cast<std::uint64_t>(std::stoull(fields[9]));
    rec.failed = std::isnan(rec.theta_hat);
    records.push_back(std::move(rec));
  }
  return records;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << "scenario,n,p,estimator,replicates,failures,mean_theta_hat,"
         "theta_true,mse,mse_se,mse_np_rel,coverage\n";
  for (const auto& row : rows) {
    out << row.scenario << ',' << row.n << ',' << row.p << ',' << row.estimator
        << ',' << row.replicates << ',' << row.failures << ','
        << format_double(row.mean_theta_hat) << ','
        << format_double(row.theta_true) << ',' << format_double(row.mse)
        << ',' << format_double(row.mse_se) << ','
        << format_double(row.mse_np_rel) << ',';
    if (row.coverage) out << format_double(*row.coverage);
    out << '\n';
  }
}

}  // namespace ellmom
