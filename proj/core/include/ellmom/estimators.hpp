#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ellmom/blocks.hpp"
#include "ellmom/elliptical.hpp"
#include "ellmom/types.hpp"

namespace ellmom {

enum class EstimatorMethod { Ideal, Marginal, MAE, Blockwise, BAE };

std::string method_name(EstimatorMethod method);

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;            // 1 - alpha
  bool radicand_clamped = false; // plug-in variance went negative, width is 0
};

// Location and scale inputs for the studentized estimators. mu and sigma_diag
// are per coordinate; sigma_blocks carries the per-block covariance
// submatrices keyed by the (0-based, sorted) index set.
struct LocationScale {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma_diag;
  std::map<std::vector<int>, Eigen::MatrixXd> sigma_blocks;
  std::vector<std::string> flags;  // floors or repairs applied upstream

  // Inserts a block submatrix, asserting symmetry and min eigenvalue > 0.
  void add_block(const std::vector<int>& block, Eigen::MatrixXd cov);
};

// True-parameter inputs for simulation studies.
LocationScale truth_location_scale(const Eigen::VectorXd& mu,
                                   const Eigen::MatrixXd& sigma,
                                   const BlockCollection* blocks = nullptr);

// Sample mean, sample variance (divisor n), and sample covariance blocks.
LocationScale sample_location_scale(const SampleMatrix& samples,
                                    const BlockCollection* blocks = nullptr);

// theta_hat = (1/n) sum_i ((y_i - mu)' Omega (y_i - mu) / p)^m. Omega must be
// the precision matrix (symmetric positive definite).
double ideal_estimator(const SampleMatrix& samples, const Eigen::VectorXd& mu,
                       const Eigen::MatrixXd& omega, MomentOrder m);

// Per-coordinate estimator: (1 / (n c_m sigma_jj^m)) sum_i (y_ij - mu_j)^{2m}
// with c_m the marginal constant at the full dimension p. j is 0-based.
double marginal_estimator(const SampleMatrix& samples, int j, double mu_j,
                          double sigma_jj, MomentOrder m);

// Average of the p marginal estimators.
double mae_estimator(const SampleMatrix& samples, const LocationScale& loc,
                     MomentOrder m);

// Block quadratic form estimator: (1 / (n c*_{m,|J|})) sum_i q_i^m with
// q_i = (y_iJ - mu_J)' Sigma_JJ^{-1} (y_iJ - mu_J).
double blockwise_estimator(const SampleMatrix& samples,
                           const std::vector<int>& block,
                           const Eigen::VectorXd& mu_block,
                           const Eigen::MatrixXd& sigma_block, MomentOrder m);

// Average of blockwise estimators over the collection. Every block must have
// a submatrix in loc.sigma_blocks.
double bae_estimator(const SampleMatrix& samples, const BlockCollection& blocks,
                     const LocationScale& loc, MomentOrder m);

// Two-sided interval for theta_m centered at the marginal estimator of
// coordinate j, with plug-in variance (c_2m / c_m^2) theta_hat_2m -
// theta_hat_m^2. A negative plug-in variance is clamped to zero and flagged.
ConfidenceInterval marginal_confidence_interval(
    const SampleMatrix& samples, int j, double mu_j, double sigma_jj,
    MomentOrder m, double theta_hat_m, double theta_hat_2m, double alpha);

struct MomentEstimate {
  EstimatorMethod method;
  int m = 1;
  double value = 0.0;
  int n_used = 0;
  std::optional<int> coordinate;            // set for Marginal
  std::optional<std::vector<int>> block;    // set for Blockwise
  std::optional<ConfidenceInterval> ci;     // only valid for Marginal

  void validate() const;
};

}  // namespace ellmom
