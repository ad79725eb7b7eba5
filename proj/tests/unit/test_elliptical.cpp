#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "ellmom/elliptical.hpp"
#include "ellmom/rng.hpp"
#include "ellmom/special.hpp"

using namespace ellmom;

TEST_SUITE_BEGIN("elliptical");

TEST_CASE("spec validation") {
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
  bad(0, 1) = 0.5;  // asymmetric
  CHECK_THROWS_AS(EllipticalSpec(Eigen::VectorXd::Zero(3), bad,
                                 RadialFamily{GaussianRadial{}}),
                  std::invalid_argument);

  Eigen::MatrixXd indef(2, 2);
  indef << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  CHECK_THROWS_AS(EllipticalSpec(Eigen::VectorXd::Zero(2), indef,
                                 RadialFamily{GaussianRadial{}}),
                  std::invalid_argument);

  Eigen::VectorXd mu(2);
  mu << 1.0, -2.0;
  CHECK_THROWS_AS(EllipticalSpec(mu, Eigen::MatrixXd::Identity(3, 3),
                                 RadialFamily{GaussianRadial{}}),
                  std::invalid_argument);

  CHECK_THROWS_AS(EllipticalSpec(Eigen::VectorXd::Zero(2),
                                 Eigen::MatrixXd::Identity(2, 2),
                                 RadialFamily{StudentTRadial{1.5}}),
                  std::invalid_argument);

  CHECK_THROWS_AS(SampleMatrix{Eigen::MatrixXd()}, std::invalid_argument);
  Eigen::MatrixXd nan_mat = Eigen::MatrixXd::Zero(2, 2);
  nan_mat(1, 1) = std::nan("");
  CHECK_THROWS_AS(SampleMatrix{nan_mat}, std::invalid_argument);
}

TEST_CASE("theoretical scaled moments") {
  RadialFamily gauss{GaussianRadial{}};
  CHECK(theoretical_theta(gauss, 10, MomentOrder(1)) ==
        doctest::Approx(1.0).epsilon(1e-14));
  // p^{-m} E[(chi^2_p)^m] = prod_j (1 + 2j/p)
  CHECK(theoretical_theta(gauss, 10, MomentOrder(2)) ==
        doctest::Approx(1.2).epsilon(1e-14));
  CHECK(theoretical_theta(gauss, 10, MomentOrder(3)) ==
        doctest::Approx(1.2 * 1.4).epsilon(1e-14));

  RadialFamily t45{StudentTRadial{4.5}};
  CHECK(theoretical_theta(t45, 100, MomentOrder(1)) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(theoretical_theta(t45, 100, MomentOrder(2)) ==
        doctest::Approx(5.0 * 1.02).epsilon(1e-12));
  CHECK_THROWS_AS((void)theoretical_theta(t45, 100, MomentOrder(3)),
                  std::domain_error);

  // no p^m overflow even when m is large relative to p
  CHECK(std::isfinite(theoretical_theta(gauss, 2, MomentOrder(20))));
}

TEST_CASE("sampling invariants") {
  const int p = 8, n = 64;
  Eigen::VectorXd mu(p);
  for (int j = 0; j < p; ++j) mu(j) = 0.5 * j - 1.0;
  Eigen::MatrixXd sigma = covariance_banded(p, 0.4);
  EllipticalSpec spec(mu, sigma, RadialFamily{GaussianRadial{}});

  RngStream rng(99, 0);
  Eigen::VectorXd xi_sq;
  SampleMatrix draw = sample_with_radials(spec, n, rng, xi_sq);
  CHECK(draw.n() == n);
  CHECK(draw.p() == p);
  CHECK(xi_sq.size() == n);

  const Eigen::MatrixXd& omega = spec.omega();
  for (int i = 0; i < n; ++i) {
    CHECK(xi_sq(i) > 0.0);
    // the precision quadratic form recovers the squared radius
    Eigen::VectorXd c = draw.data.row(i).transpose() - mu;
    double q = c.dot(omega * c);
    CHECK(q == doctest::Approx(xi_sq(i)).epsilon(1e-8));
  }

  // identical stream settings reproduce the draw, with or without radials
  RngStream rng2(99, 0);
  SampleMatrix again = sample(spec, n, rng2);
  CHECK((again.data - draw.data).cwiseAbs().maxCoeff() == 0.0);

  // sphere directions have unit norm: with identity covariance and zero mean
  // the normalized rows are y_i / xi_i
  EllipticalSpec unit(Eigen::VectorXd::Zero(p), covariance_identity(p),
                      RadialFamily{GaussianRadial{}});
  RngStream rng3(5, 1);
  Eigen::VectorXd xi_sq_u;
  SampleMatrix udraw = sample_with_radials(unit, n, rng3, xi_sq_u);
  for (int i = 0; i < n; ++i)
    CHECK(udraw.data.row(i).squaredNorm() ==
          doctest::Approx(xi_sq_u(i)).epsilon(1e-10));
}

TEST_CASE("zero covariance degenerates to the mean") {
  Eigen::VectorXd mu(3);
  mu << 4.0, -1.0, 0.25;
  EllipticalSpec spec(mu, Eigen::MatrixXd::Zero(3, 3),
                      RadialFamily{GaussianRadial{}});
  RngStream rng(5, 5);
  SampleMatrix draw = sample(spec, 10, rng);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(draw.data(i, j) == doctest::Approx(mu(j)).epsilon(1e-14));
  CHECK_THROWS_AS((void)spec.omega(), std::domain_error);
}

TEST_CASE("sample covariance approaches sigma") {
  const int p = 5, n = 200000;
  Eigen::MatrixXd sigma = covariance_block_diag(p, 2, 0.6);
  EllipticalSpec spec(Eigen::VectorXd::Zero(p), sigma,
                      RadialFamily{GaussianRadial{}});
  RngStream rng(42, 1);
  SampleMatrix draw = sample(spec, n, rng);
  Eigen::MatrixXd centered = draw.data.rowwise() - draw.data.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / double(n);
  CHECK((cov - sigma).norm() / sigma.norm() < 0.02);
}

TEST_CASE("student-t tails show up in the fourth moment") {
  const int p = 4, n = 200000;
  EllipticalSpec spec(Eigen::VectorXd::Zero(p), covariance_identity(p),
                      RadialFamily{StudentTRadial{6.0}});
  RngStream rng(77, 2);
  SampleMatrix draw = sample(spec, n, rng);
  double s4 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = draw.data(i, 0);
    s2 += x * x;
    s4 += x * x * x * x;
  }
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.05));
  // marginal kurtosis for nu = 6 is 3 (nu-2)/(nu-4) = 6
  CHECK(s4 / n == doctest::Approx(6.0).epsilon(0.1));
}

TEST_CASE("covariance factories") {
  Eigen::MatrixXd band = covariance_banded(4, 0.5);
  CHECK(band(0, 0) == 1.0);
  CHECK(band(0, 1) == 0.5);
  CHECK(band(0, 3) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(band(2, 1) == band(1, 2));
  CHECK_THROWS_AS((void)covariance_banded(3, 1.0), std::invalid_argument);

  Eigen::MatrixXd bd = covariance_block_diag(5, 2, 0.7);
  CHECK(bd(0, 1) == 0.7);
  CHECK(bd(0, 2) == 0.0);
  CHECK(bd(2, 3) == 0.7);
  CHECK(bd(4, 4) == 1.0);  // truncated trailing block is a singleton
  CHECK(bd(3, 4) == 0.0);
  CHECK_THROWS_AS((void)covariance_block_diag(5, 0, 0.5),
                  std::invalid_argument);

  CHECK(covariance_identity(3) == Eigen::MatrixXd::Identity(3, 3));

  EllipticalSpec spec(Eigen::VectorXd::Zero(4), band,
                      RadialFamily{GaussianRadial{}});
  Eigen::MatrixXd corr = spec.correlation();
  for (int j = 0; j < 4; ++j) CHECK(corr(j, j) == 1.0);
  CHECK(corr(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_SUITE_END();
