#include "ellmom/realized_xi.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ellmom/special.hpp"

namespace ellmom {

void PanelSeries::validate() const {
  if (returns.rows() < 1 || returns.cols() < 1)
    throw std::invalid_argument("PanelSeries: empty returns");
  if (!returns.allFinite())
    throw std::invalid_argument("PanelSeries: returns must be finite");
  if (factors) {
    if (factors->rows() != returns.rows())
      throw std::invalid_argument("PanelSeries: factor rows must match returns");
    if (factors->cols() < 1)
      throw std::invalid_argument("PanelSeries: factor panel has no columns");
    if (!factors->allFinite())
      throw std::invalid_argument("PanelSeries: factors must be finite");
  }
  if (!dates.empty() && static_cast<int>(dates.size()) != returns.rows())
    throw std::invalid_argument("PanelSeries: date count must match rows");
}

Eigen::MatrixXd demean(const Eigen::MatrixXd& returns, DemeanMode mode,
                       int window) {
  if (mode == DemeanMode::Zero) return returns;
  if (window < 1) throw std::invalid_argument("demean: window must be >= 1");
  const int t_len = static_cast<int>(returns.rows());
  const int p = static_cast<int>(returns.cols());
  Eigen::MatrixXd out(t_len, p);
  Eigen::RowVectorXd rolling_sum = Eigen::RowVectorXd::Zero(p);
  for (int t = 0; t < t_len; ++t) {
    int have = std::min(t, window);
    if (have == 0) {
      out.row(t) = returns.row(t);
    } else {
      out.row(t) = returns.row(t) - rolling_sum / have;
    }
    rolling_sum += returns.row(t);
    if (t >= window) rolling_sum -= returns.row(t - window);
  }
  return out;
}

FactorAdjustResult factor_adjust_observed(const Eigen::MatrixXd& x,
                                          const Eigen::MatrixXd& factors) {
  if (factors.rows() != x.rows())
    throw std::invalid_argument("factor_adjust: row mismatch");
  const int k = static_cast<int>(factors.cols());
  if (k < 1) throw std::invalid_argument("factor_adjust: no factor columns");
  if (x.rows() <= k)
    throw std::invalid_argument("factor_adjust: need more rows than factors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(factors);
  if (qr.rank() < k)
    throw std::invalid_argument(
        "factor_adjust: factor matrix is rank deficient");
  FactorAdjustResult out;
  out.factors = factors;
  Eigen::MatrixXd coef = qr.solve(x);  // K x p
  out.loadings = coef.transpose();
  out.residuals = x - factors * coef;
  return out;
}

FactorAdjustResult factor_adjust_pca(const Eigen::MatrixXd& x, int k) {
  const int t_len = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (k < 1) throw std::invalid_argument("factor_adjust_pca: k must be >= 1");
  if (k >= std::min(t_len, p))
    throw std::invalid_argument("factor_adjust_pca: k must be below min(T, p)");

  Eigen::MatrixXd scores(t_len, k);
  if (p <= t_len) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(x.transpose() * x);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("factor_adjust_pca: eigensolver failed");
    // Eigenvalues ascend; take the top k in descending order.
    for (int c = 0; c < k; ++c) {
      if (!(solver.eigenvalues()(p - 1 - c) > 0.0))
        throw std::invalid_argument(
            "factor_adjust_pca: k exceeds the numerical rank of the panel");
      scores.col(c) = x * solver.eigenvectors().col(p - 1 - c);
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(x * x.transpose());
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("factor_adjust_pca: eigensolver failed");
    for (int c = 0; c < k; ++c) {
      if (!(solver.eigenvalues()(t_len - 1 - c) > 0.0))
        throw std::invalid_argument(
            "factor_adjust_pca: k exceeds the numerical rank of the panel");
      scores.col(c) = solver.eigenvectors().col(t_len - 1 - c);
    }
  }
  // Deterministic sign: largest-magnitude score entry positive.
  for (int c = 0; c < k; ++c) {
    int idx = 0;
    scores.col(c).cwiseAbs().maxCoeff(&idx);
    if (scores(idx, c) < 0.0) scores.col(c) = -scores.col(c);
  }
  FactorAdjustResult out = factor_adjust_observed(x, scores);
  return out;
}

namespace {

double arch_loglik(const Eigen::VectorXd& z, int k,
                   const Eigen::VectorXd& coeff, Eigen::VectorXd* lambda_out) {
  const int t_len = static_cast<int>(z.size());
  double ll = 0.0;
  if (lambda_out) lambda_out->resize(t_len - k);
  for (int t = k; t < t_len; ++t) {
    double lam = coeff(0);
    for (int i = 1; i <= k; ++i) lam += coeff(i) * z(t - i) * z(t - i);
    if (lambda_out) (*lambda_out)(t - k) = lam;
    ll += -0.5 * (std::log(lam) + z(t) * z(t) / lam);
  }
  return ll;
}

Eigen::VectorXd arch_gradient(const Eigen::VectorXd& z, int k,
                              const Eigen::VectorXd& coeff) {
  const int t_len = static_cast<int>(z.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(k + 1);
  for (int t = k; t < t_len; ++t) {
    double lam = coeff(0);
    for (int i = 1; i <= k; ++i) lam += coeff(i) * z(t - i) * z(t - i);
    double common = 0.5 * (z(t) * z(t) - lam) / (lam * lam);
    grad(0) += common;
    for (int i = 1; i <= k; ++i) grad(i) += common * z(t - i) * z(t - i);
  }
  return grad;
}

}  // namespace

ArchFit arch_fit(const Eigen::VectorXd& z, int order,
                 const ArchOptions& options) {
  if (order < 1) throw std::invalid_argument("arch_fit: order must be >= 1");
  const int t_len = static_cast<int>(z.size());
  if (t_len - order < 2 * (order + 1))
    throw std::invalid_argument("arch_fit: series too short for this order");
  if (!z.allFinite()) throw std::invalid_argument("arch_fit: non-finite input");
  double var = (z.array() - z.mean()).square().sum() / t_len;
  if (!(var > 0.0))
    throw std::invalid_argument("arch_fit: degenerate (constant) series");

  const double a0_floor = 1e-10 * var;
  auto project = [&](Eigen::VectorXd v) {
    v(0) = std::max(v(0), a0_floor);
    for (int i = 1; i <= order; ++i) v(i) = std::max(v(i), 0.0);
    return v;
  };

  ArchFit fit;
  fit.order = order;
  fit.coeff.resize(order + 1);
  fit.coeff(0) = 0.5 * var;
  for (int i = 1; i <= order; ++i) fit.coeff(i) = 0.3 / order;

  double ll = arch_loglik(z, order, fit.coeff, nullptr);
  fit.loglik_trace.push_back(ll);
  Eigen::VectorXd grad = arch_gradient(z, order, fit.coeff);
  double step = var / std::max(1.0, grad.norm());
  bool converged = false;
  int iter = 0;
  for (; iter < options.max_iters && !converged; ++iter) {
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      Eigen::VectorXd trial = project(fit.coeff + step * grad);
      if ((trial - fit.coeff).cwiseAbs().maxCoeff() == 0.0) break;
      double trial_ll = arch_loglik(z, order, trial, nullptr);
      if (trial_ll > ll) {
        Eigen::VectorXd trial_grad = arch_gradient(z, order, trial);
        Eigen::VectorXd dx = trial - fit.coeff;
        Eigen::VectorXd dg = trial_grad - grad;
        double dgg = dg.squaredNorm();
        // Barzilai-Borwein step for the next iteration.
        double next_step = dgg > 0.0 ? std::abs(dx.dot(dg)) / dgg : step * 2.0;
        double change = dx.cwiseAbs().maxCoeff();
        fit.coeff = trial;
        grad = trial_grad;
        double improvement = trial_ll - ll;
        ll = trial_ll;
        fit.loglik_trace.push_back(ll);
        step = next_step > 0.0 ? next_step : step;
        accepted = true;
        if (change <= options.tol * (1.0 + fit.coeff.cwiseAbs().maxCoeff()) ||
            improvement <= options.tol * (1.0 + std::abs(ll)))
          converged = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      converged = true;  // no ascent direction at line-search resolution
    }
  }
  fit.iterations = iter;
  fit.converged = converged;
  fit.loglik = arch_loglik(z, order, fit.coeff, &fit.lambda_sq);

  double coef_sum = fit.coeff.tail(order).sum();
  fit.backfill_stationary = coef_sum < 1.0;
  fit.unconditional =
      fit.backfill_stationary ? fit.coeff(0) / (1.0 - coef_sum) : fit.coeff(0);
  return fit;
}

Eigen::VectorXd arch_full_lambda_sq(const ArchFit& fit) {
  const int t_len = static_cast<int>(fit.lambda_sq.size()) + fit.order;
  Eigen::VectorXd full(t_len);
  for (int t = 0; t < fit.order; ++t) full(t) = fit.unconditional;
  full.tail(t_len - fit.order) = fit.lambda_sq;
  return full;
}

Eigen::VectorXd realized_xi(const Eigen::MatrixXd& residuals,
                            const Eigen::MatrixXd& sigma_diag_t) {
  if (residuals.rows() != sigma_diag_t.rows() ||
      residuals.cols() != sigma_diag_t.cols())
    throw std::invalid_argument("realized_xi: panel shape mismatch");
  if (!(sigma_diag_t.minCoeff() > 0.0))
    throw std::invalid_argument("realized_xi: variances must be positive");
  return (residuals.array().square() / sigma_diag_t.array())
      .rowwise()
      .sum()
      .matrix();
}

Eigen::VectorXd smooth_series(const Eigen::VectorXd& series, int window) {
  if (window < 1) throw std::invalid_argument("smooth_series: window >= 1");
  const int t_len = static_cast<int>(series.size());
  const int back = (window - 1) / 2;
  const int fwd = window / 2;
  Eigen::VectorXd out(t_len);
  for (int t = 0; t < t_len; ++t) {
    int lo = std::max(0, t - back);
    int hi = std::min(t_len - 1, t + fwd);
    out(t) = series.segment(lo, hi - lo + 1).mean();
  }
  return out;
}

RealizedXiSeries realized_xi_pipeline(const PanelSeries& panel,
                                      const XiPipelineOptions& options) {
  panel.validate();
  const int t_len = static_cast<int>(panel.returns.rows());
  const int k = options.arch_order;
  if (k < 1)
    throw std::invalid_argument("realized_xi_pipeline: arch order must be >= 1");
  int n_factors = 0;
  if (options.factor_mode == XiPipelineOptions::Factors::Observed) {
    if (!panel.factors)
      throw std::invalid_argument("realized_xi_pipeline: no factor panel given");
    n_factors = static_cast<int>(panel.factors->cols());
  } else if (options.factor_mode == XiPipelineOptions::Factors::Pca) {
    n_factors = options.pca_k;
  }
  if (t_len <= n_factors + 2 * k)
    throw std::invalid_argument(
        "realized_xi_pipeline: need T > factors + 2 * arch order");

  Eigen::MatrixXd work =
      demean(panel.returns, options.demean_mode, options.demean_window);
  if (options.factor_mode == XiPipelineOptions::Factors::Observed)
    work = factor_adjust_observed(work, *panel.factors).residuals;
  else if (options.factor_mode == XiPipelineOptions::Factors::Pca)
    work = factor_adjust_pca(work, options.pca_k).residuals;

  const int p = static_cast<int>(work.cols());
  RealizedXiSeries out;
  Eigen::MatrixXd lambda(t_len - k, p);
  for (int j = 0; j < p; ++j) {
    ArchFit fit = arch_fit(work.col(j), k, options.arch);
    if (!fit.converged)
      out.flags.push_back("arch fit did not converge at column " +
                          std::to_string(j + 1));
    lambda.col(j) = fit.lambda_sq;
  }
  out.start_index = k;
  out.xi_sq = realized_xi(work.bottomRows(t_len - k), lambda);
  out.xi_sq_smoothed = options.smooth_window > 0
                           ? smooth_series(out.xi_sq, options.smooth_window)
                           : out.xi_sq;
  if (!panel.dates.empty())
    out.dates.assign(panel.dates.begin() + k, panel.dates.end());
  return out;
}

Eigen::VectorXd kernel_theta(const SampleMatrix& samples_over_time,
                             const LocationScale& loc, MomentOrder m,
                             KernelType kernel, double bandwidth,
                             KernelSide side) {
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("kernel_theta: bandwidth must be > 0");
  const int t_len = samples_over_time.n();
  const int p = samples_over_time.p();
  if (loc.mu.size() != p || loc.sigma_diag.size() != p)
    throw std::invalid_argument("kernel_theta: location/scale size mismatch");
  const double c_m = marginal_constant(static_cast<double>(p), m.value());

  // Per-row marginal averages.
  Eigen::VectorXd row_stat(t_len);
  for (int t = 0; t < t_len; ++t) {
    double acc = 0.0;
    for (int j = 0; j < p; ++j) {
      double sigma_jj = loc.sigma_diag(j);
      if (!(sigma_jj > 0.0))
        throw std::invalid_argument("kernel_theta: nonpositive variance");
      double zq = samples_over_time.data(t, j) - loc.mu(j);
      double w = zq * zq / sigma_jj;
      double r = w;
      for (int e = 1; e < m.value(); ++e) r *= w;
      acc += r;
    }
    row_stat(t) = acc / (c_m * p);
  }

  Eigen::VectorXd out(t_len);
  for (int t = 0; t < t_len; ++t) {
    double wsum = 0.0;
    double vsum = 0.0;
    for (int s = 0; s < t_len; ++s) {
      if (side == KernelSide::Left && s > t) continue;
      if (side == KernelSide::Right && s < t) continue;
      double u = static_cast<double>(s - t);
      double w;
      if (kernel == KernelType::Boxcar) {
        w = std::abs(u) <= bandwidth ? 1.0 : 0.0;
      } else {
        w = std::exp(-0.5 * u * u / (bandwidth * bandwidth));
      }
      if (w == 0.0) continue;
      wsum += w;
      vsum += w * row_stat(s);
    }
    out(t) = vsum / wsum;
  }
  return out;
}

}  // namespace ellmom
