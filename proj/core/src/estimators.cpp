#include "ellmom/estimators.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ellmom/special.hpp"

namespace ellmom {

namespace {

inline double int_pow(double base, int m) {
  double acc = base;
  for (int i = 1; i < m; ++i) acc *= base;
  return acc;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& sigma,
                          const std::vector<int>& block) {
  const int k = static_cast<int>(block.size());
  Eigen::MatrixXd out(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) out(a, b) = sigma(block[a], block[b]);
  return out;
}

}  // namespace

std::string method_name(EstimatorMethod method) {
  switch (method) {
    case EstimatorMethod::Ideal: return "ie";
    case EstimatorMethod::Marginal: return "marginal";
    case EstimatorMethod::MAE: return "mae";
    case EstimatorMethod::Blockwise: return "blockwise";
    case EstimatorMethod::BAE: return "bae";
  }
  return "unknown";
}

void LocationScale::add_block(const std::vector<int>& block,
                              Eigen::MatrixXd cov) {
  const int k = static_cast<int>(block.size());
  if (cov.rows() != k || cov.cols() != k)
    throw std::invalid_argument("add_block: submatrix shape mismatch");
  double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("add_block: submatrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov,
                                                        Eigen::EigenvaluesOnly);
  if (!(solver.eigenvalues().minCoeff() > 0.0)) {
    std::ostringstream msg;
    msg << "add_block: submatrix not positive definite (min eigenvalue "
        << solver.eigenvalues().minCoeff() << ")";
    throw std::invalid_argument(msg.str());
  }
  sigma_blocks[block] = std::move(cov);
}

LocationScale truth_location_scale(const Eigen::VectorXd& mu,
                                   const Eigen::MatrixXd& sigma,
                                   const BlockCollection* blocks) {
  if (sigma.rows() != mu.size() || sigma.cols() != mu.size())
    throw std::invalid_argument("truth_location_scale: shape mismatch");
  LocationScale loc;
  loc.mu = mu;
  loc.sigma_diag = sigma.diagonal();
  if (blocks)
    for (const auto& block : blocks->blocks())
      loc.add_block(block, submatrix(sigma, block));
  return loc;
}

LocationScale sample_location_scale(const SampleMatrix& samples,
                                    const BlockCollection* blocks) {
  const int n = samples.n();
  const int p = samples.p();
  LocationScale loc;
  loc.mu = samples.data.colwise().mean();
  Eigen::MatrixXd centered = samples.data.rowwise() - loc.mu.transpose();
  loc.sigma_diag = centered.array().square().colwise().mean();
  if (blocks) {
    if (blocks->dimension() != p)
      throw std::invalid_argument("sample_location_scale: block dimension mismatch");
    for (const auto& block : blocks->blocks()) {
      const int k = static_cast<int>(block.size());
      Eigen::MatrixXd sub(n, k);
      for (int a = 0; a < k; ++a) sub.col(a) = centered.col(block[a]);
      loc.add_block(block, (sub.transpose() * sub) / static_cast<double>(n));
    }
  }
  return loc;
}

double ideal_estimator(const SampleMatrix& samples, const Eigen::VectorXd& mu,
                       const Eigen::MatrixXd& omega, MomentOrder m) {
  const int n = samples.n();
  const int p = samples.p();
  if (mu.size() != p) throw std::invalid_argument("ideal_estimator: mu size");
  if (omega.rows() != p || omega.cols() != p)
    throw std::invalid_argument("ideal_estimator: omega must be p x p");
  Eigen::MatrixXd centered = samples.data.rowwise() - mu.transpose();
  Eigen::VectorXd quad =
      (centered * omega).cwiseProduct(centered).rowwise().sum();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double q = quad(i);
    if (q < 0.0) {
      if (q < -1e-8 * p)
        throw std::invalid_argument(
            "ideal_estimator: negative quadratic form, omega is not PSD");
      q = 0.0;
    }
    acc += int_pow(q / p, m.value());
  }
  return acc / n;
}

double marginal_estimator(const SampleMatrix& samples, int j, double mu_j,
                          double sigma_jj, MomentOrder m) {
  const int n = samples.n();
  const int p = samples.p();
  if (j < 0 || j >= p)
    throw std::invalid_argument("marginal_estimator: coordinate out of range");
  if (!(sigma_jj > 0.0))
    throw std::invalid_argument("marginal_estimator: sigma_jj must be > 0");
  const double c_m = marginal_constant(static_cast<double>(p), m.value());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = samples.data(i, j) - mu_j;
    acc += int_pow(z * z / sigma_jj, m.value());
  }
  return acc / (n * c_m);
}

double mae_estimator(const SampleMatrix& samples, const LocationScale& loc,
                     MomentOrder m) {
  const int n = samples.n();
  const int p = samples.p();
  if (loc.mu.size() != p || loc.sigma_diag.size() != p)
    throw std::invalid_argument("mae_estimator: location/scale size mismatch");
  const double c_m = marginal_constant(static_cast<double>(p), m.value());
  double total = 0.0;
  for (int j = 0; j < p; ++j) {
    double sigma_jj = loc.sigma_diag(j);
    if (!(sigma_jj > 0.0))
      throw std::invalid_argument("mae_estimator: nonpositive variance at "
                                  "coordinate " + std::to_string(j + 1));
    double mu_j = loc.mu(j);
    double acc = 0.0;
    const double* col = samples.data.col(j).data();
    for (int i = 0; i < n; ++i) {
      double z = col[i] - mu_j;
      acc += int_pow(z * z / sigma_jj, m.value());
    }
    total += acc;
  }
  return total / (static_cast<double>(n) * c_m * p);
}

double blockwise_estimator(const SampleMatrix& samples,
                           const std::vector<int>& block,
                           const Eigen::VectorXd& mu_block,
                           const Eigen::MatrixXd& sigma_block, MomentOrder m) {
  const int n = samples.n();
  const int p = samples.p();
  const int k = static_cast<int>(block.size());
  if (k < 1) throw std::invalid_argument("blockwise_estimator: empty block");
  for (int idx : block)
    if (idx < 0 || idx >= p)
      throw std::invalid_argument("blockwise_estimator: index out of range");
  if (mu_block.size() != k || sigma_block.rows() != k || sigma_block.cols() != k)
    throw std::invalid_argument("blockwise_estimator: shape mismatch");

  Eigen::LLT<Eigen::MatrixXd> llt(sigma_block);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        sigma_block, Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << "blockwise_estimator: block covariance not positive definite; "
        << "eigenvalues in [" << solver.eigenvalues().minCoeff() << ", "
        << solver.eigenvalues().maxCoeff() << "]";
    throw std::domain_error(msg.str());
  }

  Eigen::MatrixXd centered(n, k);
  for (int a = 0; a < k; ++a)
    centered.col(a) = samples.data.col(block[a]).array() - mu_block(a);
  // q_i = || L^{-1} (y_iJ - mu_J) ||^2
  Eigen::MatrixXd solved = llt.matrixL().solve(centered.transpose());
  const double c_star =
      block_constant(static_cast<double>(p), k, m.value());
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    acc += int_pow(solved.col(i).squaredNorm(), m.value());
  return acc / (n * c_star);
}

double bae_estimator(const SampleMatrix& samples, const BlockCollection& blocks,
                     const LocationScale& loc, MomentOrder m) {
  if (blocks.dimension() != samples.p())
    throw std::invalid_argument("bae_estimator: block dimension mismatch");
  if (loc.mu.size() != samples.p())
    throw std::invalid_argument("bae_estimator: location size mismatch");
  double acc = 0.0;
  for (const auto& block : blocks.blocks()) {
    auto it = loc.sigma_blocks.find(block);
    if (it == loc.sigma_blocks.end())
      throw std::invalid_argument(
          "bae_estimator: missing covariance submatrix for a block");
    const int k = static_cast<int>(block.size());
    Eigen::VectorXd mu_block(k);
    for (int a = 0; a < k; ++a) mu_block(a) = loc.mu(block[a]);
    acc += blockwise_estimator(samples, block, mu_block, it->second, m);
  }
  return acc / static_cast<double>(blocks.size());
}

ConfidenceInterval marginal_confidence_interval(
    const SampleMatrix& samples, int j, double mu_j, double sigma_jj,
    MomentOrder m, double theta_hat_m, double theta_hat_2m, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("confidence interval: alpha must be in (0, 1]");
  const int p = samples.p();
  double center = marginal_estimator(samples, j, mu_j, sigma_jj, m);
  double c_m = marginal_constant(static_cast<double>(p), m.value());
  double c_2m = marginal_constant(static_cast<double>(p), 2 * m.value());
  double radicand = c_2m / (c_m * c_m) * theta_hat_2m - theta_hat_m * theta_hat_m;
  ConfidenceInterval ci;
  if (radicand < 0.0) {
    radicand = 0.0;
    ci.radicand_clamped = true;
  }
  double quantile = alpha == 1.0 ? 0.0 : normal_quantile(1.0 - alpha / 2.0);
  double half = quantile * std::sqrt(radicand / samples.n());
  ci.lower = center - half;
  ci.upper = center + half;
  ci.level = 1.0 - alpha;
  return ci;
}

void MomentEstimate::validate() const {
  if (m < 1) throw std::invalid_argument("MomentEstimate: m must be >= 1");
  if (n_used < 1) throw std::invalid_argument("MomentEstimate: n_used must be >= 1");
  if (!std::isfinite(value))
    throw std::invalid_argument("MomentEstimate: value must be finite");
  if (coordinate && method != EstimatorMethod::Marginal)
    throw std::invalid_argument("MomentEstimate: coordinate only for Marginal");
  if (block && method != EstimatorMethod::Blockwise)
    throw std::invalid_argument("MomentEstimate: block only for Blockwise");
  if (ci) {
    if (method != EstimatorMethod::Marginal)
      throw std::invalid_argument("MomentEstimate: ci only for Marginal");
    if (!(ci->lower <= value && value <= ci->upper))
      throw std::invalid_argument("MomentEstimate: ci must bracket the value");
  }
}

}  // namespace ellmom
