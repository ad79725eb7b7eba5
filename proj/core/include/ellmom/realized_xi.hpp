#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ellmom/estimators.hpp"
#include "ellmom/types.hpp"

namespace ellmom {

// Observed return panel with optional observed factors.
struct PanelSeries {
  Eigen::MatrixXd returns;                 // T x p
  std::optional<Eigen::MatrixXd> factors;  // T x K, aligned with returns
  std::vector<std::string> dates;          // size T or empty

  void validate() const;
};

enum class DemeanMode { Zero, Window };

// Zero mode returns the input unchanged. Window mode subtracts the trailing
// average of the previous min(t, window) rows per coordinate (row 0 is left
// as is).
Eigen::MatrixXd demean(const Eigen::MatrixXd& returns, DemeanMode mode,
                       int window = 0);

struct FactorAdjustResult {
  Eigen::MatrixXd loadings;   // p x K
  Eigen::MatrixXd residuals;  // T x p
  Eigen::MatrixXd factors;    // T x K, observed or principal component scores
};

// Per-coordinate least squares of x on the observed factors. Rejects rank
// deficient factor matrices.
FactorAdjustResult factor_adjust_observed(const Eigen::MatrixXd& x,
                                          const Eigen::MatrixXd& factors);

// Top-k principal component scores of x (via the smaller Gram matrix), then
// least squares as above. Column signs are fixed so the largest-magnitude
// loading is positive.
FactorAdjustResult factor_adjust_pca(const Eigen::MatrixXd& x, int k);

struct ArchOptions {
  int max_iters = 500;
  double tol = 1e-10;
};

// Conditional variance fit lambda^2_t = a0 + sum_i a_i z^2_{t-i} by Gaussian
// quasi likelihood, projected gradient ascent with a monotone line search.
struct ArchFit {
  int order = 1;
  Eigen::VectorXd coeff;        // a0, a1, ..., ak; a0 > 0, a_i >= 0
  Eigen::VectorXd lambda_sq;    // fitted variances for t = order .. T-1
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> loglik_trace;  // one entry per accepted step
  double unconditional = 0.0;        // head backfill value
  bool backfill_stationary = false;  // true when sum a_i < 1
};

ArchFit arch_fit(const Eigen::VectorXd& z, int order,
                 const ArchOptions& options = {});

// Length-T variance path: the first `order` entries carry the unconditional
// backfill, the rest the fitted lambda^2.
Eigen::VectorXd arch_full_lambda_sq(const ArchFit& fit);

// xi_hat^2_t = sum_j z_tj^2 / sigma_tj for aligned residual and variance
// panels. All variances must be positive.
Eigen::VectorXd realized_xi(const Eigen::MatrixXd& residuals,
                            const Eigen::MatrixXd& sigma_diag_t);

// Centered moving average of nominal width w; windows shrink near the edges.
Eigen::VectorXd smooth_series(const Eigen::VectorXd& series, int window);

struct XiPipelineOptions {
  DemeanMode demean_mode = DemeanMode::Zero;
  int demean_window = 0;
  enum class Factors { None, Observed, Pca } factor_mode = Factors::None;
  int pca_k = 0;
  int arch_order = 2;
  int smooth_window = 0;  // 0 disables smoothing
  ArchOptions arch;
};

struct RealizedXiSeries {
  Eigen::VectorXd xi_sq;            // t = arch_order .. T-1
  Eigen::VectorXd xi_sq_smoothed;   // equals xi_sq when smoothing is off
  int start_index = 0;              // first retained time index
  std::vector<std::string> dates;   // aligned with xi_sq, empty when unknown
  std::vector<std::string> flags;   // non-convergence notes etc.
};

// Full pipeline: demean, factor-adjust, per-coordinate ARCH, aggregate, and
// optionally smooth. Requires T > factors + 2 * arch_order.
RealizedXiSeries realized_xi_pipeline(const PanelSeries& panel,
                                      const XiPipelineOptions& options);

enum class KernelType { Boxcar, Gaussian };
enum class KernelSide { Centered, Left, Right };

// Kernel-weighted time-local moment estimate: at each t, the weighted average
// over s of the per-row marginal average (exponent m on the studentized
// squares). A boxcar with bandwidth >= T and centered side reproduces the
// static estimator at every t.
Eigen::VectorXd kernel_theta(const SampleMatrix& samples_over_time,
                             const LocationScale& loc, MomentOrder m,
                             KernelType kernel, double bandwidth,
                             KernelSide side);

}  // namespace ellmom
