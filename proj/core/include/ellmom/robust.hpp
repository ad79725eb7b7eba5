#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ellmom/blocks.hpp"
#include "ellmom/estimators.hpp"

namespace ellmom {

class RngStream;

struct HuberConfig {
  std::vector<double> tau_grid;  // ascending; empty means data-driven default
  int cv_folds = 5;
  int max_iters = 200;
  double tol = 1e-10;
};

void validate_huber_config(const HuberConfig& config);

// Quadratic inside [-tau, tau], linear outside.
double huber_loss(double u, double tau);

// M-estimate of location under the Huber loss, IRLS fixed point. Throws on
// non-convergence, reporting the last iterate.
double huber_location(const Eigen::VectorXd& x, double tau,
                      const HuberConfig& config);

struct HuberVariance {
  double value = 0.0;  // floored second moment minus squared location
  double beta = 0.0;   // robust second moment E-hat[x^2]
  bool floored = false;
};

// Robust variance: Huber location of the squared data minus mu_hat^2, floored
// at 1e-12 * max(beta, 1).
HuberVariance huber_variance(const Eigen::VectorXd& x, double mu_hat,
                             double tau, const HuberConfig& config);

// Robust covariance: Huber location of the products minus mu_x * mu_y.
double huber_covariance(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        double mu_x, double mu_y, double tau,
                        const HuberConfig& config);

// K-fold cross validation over the tau grid for a Huber location fit on the
// (already transformed) series z. Score is the mean squared deviation of
// held-out points from the training fit; ties resolve toward the larger tau.
// Requires n >= 2 * cv_folds.
double cross_validate_tau(const Eigen::VectorXd& z, const HuberConfig& config,
                          RngStream& rng);

// Log-spaced grid helpers for configs and the CLI.
std::vector<double> log_spaced_grid(double lo, double hi, int steps);
// Grid anchored at the rescaled median absolute deviation of z.
std::vector<double> default_tau_grid(const Eigen::VectorXd& z);

// Full robust layer: per-coordinate location and variance with CV-chosen
// taus, plus per-block covariance submatrices when blocks are given. Blocks
// that come out non positive definite are repaired by diagonal loading
// (|min eigenvalue| + 1e-8) and flagged.
LocationScale robust_location_scale(const SampleMatrix& samples,
                                    const BlockCollection* blocks,
                                    const HuberConfig& config, RngStream& rng);

}  // namespace ellmom
