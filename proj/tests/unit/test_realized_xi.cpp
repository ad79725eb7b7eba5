#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "ellmom/elliptical.hpp"
#include "ellmom/realized_xi.hpp"
#include "ellmom/rng.hpp"

using namespace ellmom;

TEST_SUITE_BEGIN("realized_xi");

TEST_CASE("demeaning") {
  Eigen::MatrixXd x(5, 1);
  x << 1.0, 2.0, 3.0, 4.0, 5.0;

  Eigen::MatrixXd untouched = demean(x, DemeanMode::Zero);
  CHECK((untouched - x).cwiseAbs().maxCoeff() == 0.0);

  // window 1 yields first differences after the initial row
  Eigen::MatrixXd d1 = demean(x, DemeanMode::Window, 1);
  CHECK(d1(0, 0) == 1.0);
  for (int t = 1; t < 5; ++t) CHECK(d1(t, 0) == x(t, 0) - x(t - 1, 0));

  // window 2: trailing average over the available history
  Eigen::MatrixXd d2 = demean(x, DemeanMode::Window, 2);
  CHECK(d2(0, 0) == 1.0);
  CHECK(d2(1, 0) == doctest::Approx(2.0 - 1.0).epsilon(1e-15));
  CHECK(d2(2, 0) == doctest::Approx(3.0 - 1.5).epsilon(1e-15));
  CHECK(d2(3, 0) == doctest::Approx(4.0 - 2.5).epsilon(1e-15));
  CHECK(d2(4, 0) == doctest::Approx(5.0 - 3.5).epsilon(1e-15));

  CHECK_THROWS_AS((void)demean(x, DemeanMode::Window, 0),
                  std::invalid_argument);
}

TEST_CASE("observed factor adjustment") {
  const int t_len = 40, p = 5, k = 2;
  RngStream rng(61, 0);
  Eigen::MatrixXd f(t_len, k);
  for (int t = 0; t < t_len; ++t)
    for (int c = 0; c < k; ++c) f(t, c) = rng.normal();
  Eigen::MatrixXd b(p, k);
  for (int j = 0; j < p; ++j)
    for (int c = 0; c < k; ++c) b(j, c) = 0.5 * j - c;

  // noiseless panel: exact loading recovery, zero residuals
  Eigen::MatrixXd x = f * b.transpose();
  FactorAdjustResult fit = factor_adjust_observed(x, f);
  CHECK((fit.loadings - b).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-10);

  // noisy panel: residuals are orthogonal to the factors
  Eigen::MatrixXd noisy = x;
  for (int t = 0; t < t_len; ++t)
    for (int j = 0; j < p; ++j) noisy(t, j) += 0.3 * rng.normal();
  FactorAdjustResult nfit = factor_adjust_observed(noisy, f);
  CHECK((f.transpose() * nfit.residuals).cwiseAbs().maxCoeff() < 1e-8);

  Eigen::MatrixXd dup(t_len, 2);
  dup.col(0) = f.col(0);
  dup.col(1) = f.col(0);
  CHECK_THROWS_AS((void)factor_adjust_observed(x, dup), std::invalid_argument);
  CHECK_THROWS_AS((void)factor_adjust_observed(x, Eigen::MatrixXd::Ones(3, 1)),
                  std::invalid_argument);
}

TEST_CASE("principal component adjustment") {
  const int t_len = 20, p = 5;
  RngStream rng(62, 0);
  Eigen::VectorXd s(t_len);
  for (int t = 0; t < t_len; ++t) s(t) = rng.normal();
  Eigen::VectorXd v(p);
  v << 1.0, -2.0, 0.5, 3.0, -1.0;
  Eigen::MatrixXd x = s * v.transpose();  // exact rank one

  FactorAdjustResult fit = factor_adjust_pca(x, 1);
  CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(fit.factors.cols() == 1);
  // deterministic sign rule: the largest-magnitude score is positive
  int idx = 0;
  fit.factors.col(0).cwiseAbs().maxCoeff(&idx);
  CHECK(fit.factors(idx, 0) > 0.0);

  // wide panel exercises the Gram-side branch
  Eigen::MatrixXd wide = (s.head(4) * v.transpose());
  Eigen::MatrixXd wide10(4, 10);
  wide10 << wide, wide;  // p = 10 > T = 4, still rank one
  FactorAdjustResult wfit = factor_adjust_pca(wide10, 1);
  CHECK(wfit.residuals.cwiseAbs().maxCoeff() < 1e-8);

  CHECK_THROWS_AS((void)factor_adjust_pca(x, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)factor_adjust_pca(x, 5), std::invalid_argument);
  // rank-one panel cannot support two components
  CHECK_THROWS_AS((void)factor_adjust_pca(x, 2), std::invalid_argument);
}

TEST_CASE("arch fit on independent data") {
  RngStream rng(63, 0);
  Eigen::VectorXd z(400);
  for (int t = 0; t < 400; ++t) z(t) = rng.normal();
  ArchFit fit = arch_fit(z, 1);
  CHECK(fit.converged);
  CHECK(fit.coeff(1) < 0.2);  // no real conditional heteroskedasticity
  CHECK(fit.coeff(0) > 0.0);
  // the accepted-step trace never decreases
  for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i)
    CHECK(fit.loglik_trace[i] >= fit.loglik_trace[i - 1]);

  CHECK_THROWS_AS((void)arch_fit(z, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)arch_fit(z.head(5), 2), std::invalid_argument);
  CHECK_THROWS_AS((void)arch_fit(Eigen::VectorXd::Ones(50), 1),
                  std::invalid_argument);
}

TEST_CASE("arch fit recovers a true arch process") {
  const double a0 = 0.5, a1 = 0.6;
  const int t_len = 4000;
  RngStream rng(64, 0);
  Eigen::VectorXd z(t_len);
  double lam = a0 / (1.0 - a1);
  z(0) = std::sqrt(lam) * rng.normal();
  for (int t = 1; t < t_len; ++t) {
    lam = a0 + a1 * z(t - 1) * z(t - 1);
    z(t) = std::sqrt(lam) * rng.normal();
  }
  ArchFit fit = arch_fit(z, 1);
  CHECK(fit.converged);
  CHECK(fit.coeff(0) == doctest::Approx(a0).epsilon(0.3));
  CHECK(fit.coeff(1) == doctest::Approx(a1).epsilon(0.2));

  // fitted variances reproduce the recursion
  for (int t = 0; t < 5; ++t) {
    double expect = fit.coeff(0) + fit.coeff(1) * z(t) * z(t);
    CHECK(fit.lambda_sq(t) == doctest::Approx(expect).epsilon(1e-12));
  }

  CHECK(fit.backfill_stationary);
  CHECK(fit.unconditional ==
        doctest::Approx(fit.coeff(0) / (1.0 - fit.coeff(1))).epsilon(1e-12));
  Eigen::VectorXd full = arch_full_lambda_sq(fit);
  CHECK(full.size() == t_len);
  CHECK(full(0) == fit.unconditional);
  CHECK(full(1) == fit.lambda_sq(0));
}

TEST_CASE("realized radial aggregation is exact on constructed data") {
  const int t_len = 30, p = 6;
  RngStream rng(65, 0);
  Eigen::MatrixXd residuals(t_len, p);
  Eigen::MatrixXd lambda(t_len, p);
  Eigen::VectorXd xi_sq_true(t_len);
  for (int t = 0; t < t_len; ++t) {
    Eigen::VectorXd u = sample_sphere(p, rng);
    xi_sq_true(t) = 1.0 + 0.25 * t;
    for (int j = 0; j < p; ++j) {
      lambda(t, j) = 0.5 + 0.1 * j + 0.01 * t;
      residuals(t, j) = std::sqrt(xi_sq_true(t) * lambda(t, j)) * u(j);
    }
  }
  Eigen::VectorXd xi_sq = realized_xi(residuals, lambda);
  for (int t = 0; t < t_len; ++t)
    CHECK(xi_sq(t) == doctest::Approx(xi_sq_true(t)).epsilon(1e-12));

  CHECK_THROWS_AS((void)realized_xi(residuals, lambda.topRows(5)),
                  std::invalid_argument);
  Eigen::MatrixXd bad = lambda;
  bad(0, 0) = 0.0;
  CHECK_THROWS_AS((void)realized_xi(residuals, bad), std::invalid_argument);
}

TEST_CASE("smoothing") {
  Eigen::VectorXd step(6);
  step << 0.0, 0.0, 0.0, 1.0, 1.0, 1.0;

  // window 1 is the identity
  CHECK((smooth_series(step, 1) - step).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd s3 = smooth_series(step, 3);
  CHECK(s3(0) == 0.0);                                 // shrunk edge window
  CHECK(s3(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(s3(3) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s3(5) == 1.0);

  // symmetric windows preserve linear series away from the edges
  Eigen::VectorXd lin(9);
  for (int t = 0; t < 9; ++t) lin(t) = 2.0 * t - 3.0;
  Eigen::VectorXd l5 = smooth_series(lin, 5);
  for (int t = 2; t <= 6; ++t)
    CHECK(l5(t) == doctest::Approx(lin(t)).epsilon(1e-14));

  // even window leans forward
  Eigen::VectorXd s2 = smooth_series(step, 2);
  CHECK(s2(2) == 0.5);
  CHECK(s2(5) == 1.0);

  CHECK_THROWS_AS((void)smooth_series(step, 0), std::invalid_argument);
}

TEST_CASE("pipeline structure") {
  const int t_len = 80, p = 4;
  RngStream rng(66, 0);
  PanelSeries panel;
  panel.returns.resize(t_len, p);
  for (int t = 0; t < t_len; ++t)
    for (int j = 0; j < p; ++j) panel.returns(t, j) = rng.normal();
  panel.dates.resize(t_len);
  for (int t = 0; t < t_len; ++t) panel.dates[t] = "d" + std::to_string(t);

  XiPipelineOptions opt;
  opt.arch_order = 2;
  RealizedXiSeries out = realized_xi_pipeline(panel, opt);
  CHECK(out.xi_sq.size() == t_len - 2);
  CHECK(out.start_index == 2);
  REQUIRE(out.dates.size() == static_cast<std::size_t>(t_len - 2));
  CHECK(out.dates.front() == "d2");
  CHECK(out.xi_sq.minCoeff() > 0.0);
  CHECK((out.xi_sq_smoothed - out.xi_sq).cwiseAbs().maxCoeff() == 0.0);

  opt.smooth_window = 5;
  RealizedXiSeries smoothed = realized_xi_pipeline(panel, opt);
  CHECK(smoothed.xi_sq_smoothed.size() == smoothed.xi_sq.size());
  CHECK((smoothed.xi_sq_smoothed - smoothed.xi_sq).cwiseAbs().maxCoeff() >
        0.0);

  // factor modes: missing factor panel is rejected, observed factors reduce
  // the dimension requirement bookkeeping
  XiPipelineOptions fopt;
  fopt.factor_mode = XiPipelineOptions::Factors::Observed;
  CHECK_THROWS_AS((void)realized_xi_pipeline(panel, fopt),
                  std::invalid_argument);
  panel.factors = Eigen::MatrixXd(t_len, 1);
  for (int t = 0; t < t_len; ++t) (*panel.factors)(t, 0) = rng.normal();
  fopt.arch_order = 1;
  RealizedXiSeries fadj = realized_xi_pipeline(panel, fopt);
  CHECK(fadj.xi_sq.size() == t_len - 1);

  XiPipelineOptions popt;
  popt.factor_mode = XiPipelineOptions::Factors::Pca;
  popt.pca_k = 1;
  popt.arch_order = 1;
  RealizedXiSeries padj = realized_xi_pipeline(panel, popt);
  CHECK(padj.xi_sq.size() == t_len - 1);

  // short panels are rejected up front
  PanelSeries tiny;
  tiny.returns = panel.returns.topRows(4);
  XiPipelineOptions topt;
  topt.arch_order = 2;
  CHECK_THROWS_AS((void)realized_xi_pipeline(tiny, topt),
                  std::invalid_argument);

  PanelSeries misdated;
  misdated.returns = panel.returns;
  misdated.dates = {"only-one"};
  CHECK_THROWS_AS(misdated.validate(), std::invalid_argument);
}

TEST_CASE("kernel moment paths") {
  const int t_len = 50, p = 4;
  EllipticalSpec spec(Eigen::VectorXd::Zero(p), covariance_identity(p),
                      RadialFamily{GaussianRadial{}});
  RngStream rng(67, 0);
  SampleMatrix y = sample(spec, t_len, rng);
  LocationScale loc = truth_location_scale(spec.mu(), spec.sigma());
  MomentOrder m(2);

  // boxcar wider than the sample reproduces the static estimator everywhere
  double static_value = mae_estimator(y, loc, m);
  Eigen::VectorXd wide = kernel_theta(y, loc, m, KernelType::Boxcar,
                                      double(t_len), KernelSide::Centered);
  for (int t = 0; t < t_len; ++t)
    CHECK(wide(t) == doctest::Approx(static_value).epsilon(1e-12));

  // a sub-unit bandwidth reduces to the per-row statistic
  Eigen::VectorXd narrow = kernel_theta(y, loc, m, KernelType::Boxcar, 0.4,
                                        KernelSide::Centered);
  for (int t = 0; t < t_len; ++t) {
    SampleMatrix row(Eigen::MatrixXd(y.data.row(t)));
    CHECK(narrow(t) ==
          doctest::Approx(mae_estimator(row, loc, m)).epsilon(1e-12));
  }

  // one-sided kernels only look the right way
  Eigen::VectorXd left = kernel_theta(y, loc, m, KernelType::Boxcar,
                                      double(t_len), KernelSide::Left);
  Eigen::VectorXd right = kernel_theta(y, loc, m, KernelType::Boxcar,
                                       double(t_len), KernelSide::Right);
  CHECK(left(0) == doctest::Approx(narrow(0)).epsilon(1e-12));
  CHECK(right(t_len - 1) ==
        doctest::Approx(narrow(t_len - 1)).epsilon(1e-12));
  CHECK(left(t_len - 1) == doctest::Approx(static_value).epsilon(1e-12));
  CHECK(right(0) == doctest::Approx(static_value).epsilon(1e-12));

  // a gaussian kernel with huge bandwidth approaches the static value
  Eigen::VectorXd gwide = kernel_theta(y, loc, m, KernelType::Gaussian, 1e6,
                                       KernelSide::Centered);
  CHECK(gwide(10) == doctest::Approx(static_value).epsilon(1e-9));

  CHECK_THROWS_AS((void)kernel_theta(y, loc, m, KernelType::Boxcar, 0.0,
                                     KernelSide::Centered),
                  std::invalid_argument);
}

TEST_CASE("kernel path tracks a variance regime shift") {
  const int t_len = 200, p = 5;
  RngStream rng(68, 0);
  Eigen::MatrixXd data(t_len, p);
  for (int t = 0; t < t_len; ++t) {
    double scale = t < 100 ? 1.0 : 3.0;
    for (int j = 0; j < p; ++j) data(t, j) = scale * rng.normal();
  }
  LocationScale loc;
  loc.mu = Eigen::VectorXd::Zero(p);
  loc.sigma_diag = Eigen::VectorXd::Ones(p);

  Eigen::VectorXd path =
      kernel_theta(SampleMatrix(data), loc, MomentOrder(1), KernelType::Boxcar,
                   10.0, KernelSide::Centered);
  // studentized against unit variance, the path reads ~1 early and ~9 late
  CHECK(path(30) < 2.5);
  CHECK(path(170) > 5.0);
}

TEST_SUITE_END();
