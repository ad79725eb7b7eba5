#include "ellmom/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ellmom/rng.hpp"

namespace ellmom {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty vector");
  std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

double median_of(const Eigen::VectorXd& x) {
  return median_of(std::vector<double>(x.data(), x.data() + x.size()));
}

}  // namespace

void validate_huber_config(const HuberConfig& config) {
  if (config.cv_folds < 2)
    throw std::invalid_argument("HuberConfig: cv_folds must be >= 2");
  if (config.max_iters < 1)
    throw std::invalid_argument("HuberConfig: max_iters must be >= 1");
  if (!(config.tol > 0.0))
    throw std::invalid_argument("HuberConfig: tol must be > 0");
  for (std::size_t i = 0; i < config.tau_grid.size(); ++i) {
    if (!(config.tau_grid[i] > 0.0))
      throw std::invalid_argument("HuberConfig: taus must be > 0");
    if (i > 0 && !(config.tau_grid[i] > config.tau_grid[i - 1]))
      throw std::invalid_argument("HuberConfig: tau grid must be ascending");
  }
}

double huber_loss(double u, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("huber_loss: tau must be > 0");
  double a = std::abs(u);
  if (a <= tau) return 0.5 * u * u;
  return tau * a - 0.5 * tau * tau;
}

double huber_location(const Eigen::VectorXd& x, double tau,
                      const HuberConfig& config) {
  if (x.size() < 1)
    throw std::invalid_argument("huber_location: empty sample");
  if (!(tau > 0.0))
    throw std::invalid_argument("huber_location: tau must be > 0");
  const int n = static_cast<int>(x.size());
  double beta = median_of(x);
  for (int iter = 0; iter < config.max_iters; ++iter) {
    double wsum = 0.0;
    double wxsum = 0.0;
    for (int i = 0; i < n; ++i) {
      double r = std::abs(x(i) - beta);
      double w = r <= tau ? 1.0 : tau / r;
      wsum += w;
      wxsum += w * x(i);
    }
    double next = wxsum / wsum;
    double delta = std::abs(next - beta);
    beta = next;
    if (delta <= config.tol * std::max(1.0, std::abs(beta))) return beta;
  }
  std::ostringstream msg;
  msg << "huber_location: no convergence after " << config.max_iters
      << " iterations (last iterate " << beta << ", tau " << tau << ")";
  throw std::runtime_error(msg.str());
}

HuberVariance huber_variance(const Eigen::VectorXd& x, double mu_hat,
                             double tau, const HuberConfig& config) {
  HuberVariance out;
  out.beta = huber_location(x.array().square().matrix(), tau, config);
  double raw = out.beta - mu_hat * mu_hat;
  double floor = 1e-12 * std::max(out.beta, 1.0);
  out.floored = raw < floor;
  out.value = out.floored ? floor : raw;
  return out;
}

double huber_covariance(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        double mu_x, double mu_y, double tau,
                        const HuberConfig& config) {
  if (x.size() != y.size())
    throw std::invalid_argument("huber_covariance: size mismatch");
  Eigen::VectorXd prod = x.cwiseProduct(y);
  return huber_location(prod, tau, config) - mu_x * mu_y;
}

double cross_validate_tau(const Eigen::VectorXd& z, const HuberConfig& config,
                          RngStream& rng) {
  validate_huber_config(config);
  const int n = static_cast<int>(z.size());
  const int folds = config.cv_folds;
  if (n < 2 * folds)
    throw std::invalid_argument("cross_validate_tau: need n >= 2 * cv_folds");
  std::vector<double> grid =
      config.tau_grid.empty() ? default_tau_grid(z) : config.tau_grid;

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    std::uint64_t u = rng.next_u64() % static_cast<std::uint64_t>(i + 1);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(u)]);
  }

  double best_tau = grid.front();
  double best_score = std::numeric_limits<double>::infinity();
  Eigen::VectorXd train(n);
  for (double tau : grid) {
    double score_sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      int n_train = 0;
      for (int i = 0; i < n; ++i)
        if (i % folds != f) train(n_train++) = z(perm[static_cast<std::size_t>(i)]);
      double beta = huber_location(train.head(n_train), tau, config);
      for (int i = 0; i < n; ++i)
        if (i % folds == f) {
          double d = z(perm[static_cast<std::size_t>(i)]) - beta;
          score_sum += d * d;
        }
    }
    if (score_sum <= best_score) {  // ties resolve toward the larger tau
      best_score = score_sum;
      best_tau = tau;
    }
  }
  return best_tau;
}

std::vector<double> log_spaced_grid(double lo, double hi, int steps) {
  if (!(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("log_spaced_grid: need 0 < lo < hi");
  if (steps < 2) throw std::invalid_argument("log_spaced_grid: steps >= 2");
  std::vector<double> grid(static_cast<std::size_t>(steps));
  double log_lo = std::log(lo);
  double step = (std::log(hi) - log_lo) / (steps - 1);
  for (int i = 0; i < steps; ++i)
    grid[static_cast<std::size_t>(i)] = std::exp(log_lo + i * step);
  return grid;
}

std::vector<double> default_tau_grid(const Eigen::VectorXd& z) {
  double center = median_of(z);
  double mad = median_of((z.array() - center).abs().matrix());
  double scale = 1.4826 * mad;
  if (!(scale > 0.0)) {
    double sd = std::sqrt(
        (z.array() - z.mean()).square().sum() / std::max<int>(1, z.size()));
    scale = sd > 0.0 ? sd : 1.0;
  }
  return log_spaced_grid(0.5 * scale, 2000.0 * scale, 8);
}

LocationScale robust_location_scale(const SampleMatrix& samples,
                                    const BlockCollection* blocks,
                                    const HuberConfig& config, RngStream& rng) {
  validate_huber_config(config);
  const int n = samples.n();
  const int p = samples.p();
  if (n < 2 * config.cv_folds)
    throw std::invalid_argument("robust_location_scale: need n >= 2 * cv_folds");
  LocationScale loc;
  loc.mu.resize(p);
  loc.sigma_diag.resize(p);
  for (int j = 0; j < p; ++j) {
    Eigen::VectorXd col = samples.data.col(j);
    double tau_loc = cross_validate_tau(col, config, rng);
    loc.mu(j) = huber_location(col, tau_loc, config);
    Eigen::VectorXd sq = col.array().square().matrix();
    double tau_var = cross_validate_tau(sq, config, rng);
    HuberVariance hv = huber_variance(col, loc.mu(j), tau_var, config);
    loc.sigma_diag(j) = hv.value;
    if (hv.floored)
      loc.flags.push_back("variance floored at coordinate " +
                          std::to_string(j + 1));
  }
  if (blocks) {
    if (blocks->dimension() != p)
      throw std::invalid_argument("robust_location_scale: block dimension mismatch");
    for (std::size_t b = 0; b < blocks->blocks().size(); ++b) {
      const auto& block = blocks->blocks()[b];
      const int k = static_cast<int>(block.size());
      Eigen::MatrixXd cov(k, k);
      for (int a = 0; a < k; ++a) cov(a, a) = loc.sigma_diag(block[a]);
      for (int a = 0; a < k; ++a) {
        for (int c = a + 1; c < k; ++c) {
          Eigen::VectorXd xa = samples.data.col(block[a]);
          Eigen::VectorXd xc = samples.data.col(block[c]);
          double tau = cross_validate_tau(xa.cwiseProduct(xc), config, rng);
          double value = huber_covariance(xa, xc, loc.mu(block[a]),
                                          loc.mu(block[c]), tau, config);
          cov(a, c) = value;
          cov(c, a) = value;
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
          cov, Eigen::EigenvaluesOnly);
      double lambda_min = solver.eigenvalues().minCoeff();
      if (lambda_min <= 0.0) {
        cov.diagonal().array() += std::abs(lambda_min) + 1e-8;
        loc.flags.push_back("block " + std::to_string(b + 1) +
                            " repaired by diagonal loading");
      }
      loc.add_block(block, std::move(cov));
    }
  }
  return loc;
}

}  // namespace ellmom
