#include "ellmom/elliptical.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ellmom/io.hpp"
#include "ellmom/rng.hpp"
#include "ellmom/special.hpp"

namespace ellmom {

SampleMatrix::SampleMatrix(Eigen::MatrixXd values) : data(std::move(values)) {
  if (data.rows() < 1 || data.cols() < 1)
    throw std::invalid_argument("SampleMatrix: need at least one row and column");
  if (!data.allFinite())
    throw std::invalid_argument("SampleMatrix: entries must be finite");
}

EllipticalSpec::EllipticalSpec(Eigen::VectorXd mu, Eigen::MatrixXd sigma,
                               RadialFamily family)
    : mu_(std::move(mu)), sigma_(std::move(sigma)), family_(std::move(family)) {
  validate_radial(family_);
  const int p = static_cast<int>(mu_.size());
  if (p < 1) throw std::invalid_argument("EllipticalSpec: p must be >= 1");
  if (sigma_.rows() != p || sigma_.cols() != p)
    throw std::invalid_argument("EllipticalSpec: sigma must be p x p");
  double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
  if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("EllipticalSpec: sigma is not symmetric");
  sigma_ = 0.5 * (sigma_ + sigma_.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma_);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("EllipticalSpec: eigendecomposition failed");
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
  double lambda_max = std::max(eigenvalues_.maxCoeff(), 0.0);
  double tol = 1e-10 * std::max(1.0, lambda_max);
  if (eigenvalues_.minCoeff() < -tol) {
    std::ostringstream msg;
    msg << "EllipticalSpec: sigma is not positive semidefinite; eigenvalues in ["
        << eigenvalues_.minCoeff() << ", " << eigenvalues_.maxCoeff() << "]";
    throw std::invalid_argument(msg.str());
  }
  Eigen::VectorXd clipped = eigenvalues_.cwiseMax(0.0);
  eigenvalues_ = clipped;
  sigma_sqrt_ = eigenvectors_ * clipped.cwiseSqrt().asDiagonal() *
                eigenvectors_.transpose();

  correlation_ = Eigen::MatrixXd::Identity(p, p);
  for (int j = 0; j < p; ++j) {
    for (int k = j + 1; k < p; ++k) {
      double denom = std::sqrt(sigma_(j, j) * sigma_(k, k));
      double value = denom > 0.0 ? sigma_(j, k) / denom : 0.0;
      correlation_(j, k) = value;
      correlation_(k, j) = value;
    }
  }

  sigma_diagonal_ = true;
  for (int j = 0; j < p && sigma_diagonal_; ++j)
    for (int k = j + 1; k < p; ++k)
      if (sigma_(j, k) != 0.0) {
        sigma_diagonal_ = false;
        break;
      }
}

const Eigen::MatrixXd& EllipticalSpec::omega() const {
  if (!omega_) {
    double lambda_max = eigenvalues_.maxCoeff();
    double tol = 1e-12 * std::max(1.0, lambda_max);
    if (eigenvalues_.minCoeff() <= tol) {
      std::ostringstream msg;
      msg << "EllipticalSpec: sigma is singular (min eigenvalue "
          << eigenvalues_.minCoeff() << "), no precision matrix";
      throw std::domain_error(msg.str());
    }
    omega_ = eigenvectors_ * eigenvalues_.cwiseInverse().asDiagonal() *
             eigenvectors_.transpose();
  }
  return *omega_;
}

double theoretical_theta(const RadialFamily& family, int p, MomentOrder m) {
  if (p < 1) throw std::invalid_argument("theoretical_theta: p must be >= 1");
  double r_m = radial_moment_ratio(family, p, m.value());
  double acc = r_m;
  for (int j = 0; j < m.value(); ++j) acc *= 1.0 + 2.0 * j / p;
  return acc;
}

Eigen::VectorXd sample_sphere(int p, RngStream& rng) {
  if (p < 1) throw std::invalid_argument("sample_sphere: p must be >= 1");
  Eigen::VectorXd g(p);
  for (;;) {
    for (int j = 0; j < p; ++j) g(j) = rng.normal();
    double norm = g.norm();
    if (norm > 1e-300) return g / norm;
  }
}

double sample_radial(const RadialFamily& family, int p, RngStream& rng) {
  validate_radial(family);
  if (p < 1) throw std::invalid_argument("sample_radial: p must be >= 1");
  if (std::holds_alternative<GaussianRadial>(family))
    return std::sqrt(rng.chi_square(static_cast<double>(p)));
  if (const auto* t = std::get_if<StudentTRadial>(&family)) {
    double numer = rng.chi_square(static_cast<double>(p));
    double denom = rng.chi_square(t->nu);
    return std::sqrt((t->nu - 2.0) * numer / denom);
  }
  double xi = std::get<CustomRadial>(family).sampler(p, rng);
  if (!(xi >= 0.0) || !std::isfinite(xi))
    throw std::runtime_error("sample_radial: custom sampler returned an "
                             "invalid radial value");
  return xi;
}

SampleMatrix sample_with_radials(const EllipticalSpec& spec, int n,
                                 RngStream& rng, Eigen::VectorXd& xi_sq_out) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  const int p = spec.p();
  Eigen::MatrixXd scaled(n, p);
  xi_sq_out.resize(n);
  Eigen::VectorXd g(p);
  for (int i = 0; i < n; ++i) {
    for (;;) {
      for (int j = 0; j < p; ++j) g(j) = rng.normal();
      double norm = g.norm();
      if (norm > 1e-300) {
        g /= norm;
        break;
      }
    }
    double xi = sample_radial(spec.family(), p, rng);
    xi_sq_out(i) = xi * xi;
    scaled.row(i) = xi * g.transpose();
  }
  Eigen::MatrixXd rows;
  if (spec.sigma_diagonal()) {
    rows = scaled * spec.sigma().diagonal().cwiseSqrt().asDiagonal();
  } else {
    rows = scaled * spec.sigma_sqrt();
  }
  rows.rowwise() += spec.mu().transpose();
  return SampleMatrix(std::move(rows));
}

SampleMatrix sample(const EllipticalSpec& spec, int n, RngStream& rng) {
  Eigen::VectorXd unused;
  return sample_with_radials(spec, n, rng, unused);
}

Eigen::MatrixXd covariance_identity(int p) {
  if (p < 1) throw std::invalid_argument("covariance_identity: p must be >= 1");
  return Eigen::MatrixXd::Identity(p, p);
}

Eigen::MatrixXd covariance_banded(int p, double a) {
  if (p < 1) throw std::invalid_argument("covariance_banded: p must be >= 1");
  if (!(std::abs(a) < 1.0))
    throw std::invalid_argument("covariance_banded: |a| must be < 1");
  Eigen::MatrixXd sigma(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) sigma(i, j) = std::pow(a, std::abs(i - j));
  return sigma;
}

Eigen::MatrixXd covariance_block_diag(int p, int block_size, double rho) {
  if (p < 1) throw std::invalid_argument("covariance_block_diag: p must be >= 1");
  if (block_size < 1 || block_size > p)
    throw std::invalid_argument("covariance_block_diag: block size in [1, p]");
  if (!(rho > -1.0 && rho < 1.0))
    throw std::invalid_argument("covariance_block_diag: rho must be in (-1, 1)");
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(p, p);
  for (int start = 0; start < p; start += block_size) {
    int stop = std::min(start + block_size, p);
    for (int i = start; i < stop; ++i)
      for (int j = start; j < stop; ++j)
        if (i != j) sigma(i, j) = rho;
  }
  return sigma;
}

Eigen::MatrixXd covariance_from_file(const std::string& path) {
  Eigen::MatrixXd sigma = read_covariance_csv(path);
  double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("covariance_from_file: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      0.5 * (sigma + sigma.transpose()), Eigen::EigenvaluesOnly);
  double lambda_min = solver.eigenvalues().minCoeff();
  double lambda_max = solver.eigenvalues().maxCoeff();
  if (lambda_min < -1e-10 * std::max(1.0, lambda_max)) {
    std::ostringstream msg;
    msg << "covariance_from_file: matrix is not positive semidefinite; "
        << "eigenvalues in [" << lambda_min << ", " << lambda_max << "]";
    throw std::invalid_argument(msg.str());
  }
  return sigma;
}

}  // namespace ellmom
