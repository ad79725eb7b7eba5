#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "ellmom/radial.hpp"
#include "ellmom/types.hpp"

namespace ellmom {

class RngStream;

// n x p data matrix, rows are observations. Entries must be finite.
struct SampleMatrix {
  Eigen::MatrixXd data;

  explicit SampleMatrix(Eigen::MatrixXd values);
  int n() const { return static_cast<int>(data.rows()); }
  int p() const { return static_cast<int>(data.cols()); }
};

// Generator specification for Y = mu + xi * Sigma^{1/2} U with E[xi^2] = p.
// Sigma must be symmetric PSD; eigenvalues down to -1e-10 (relative) are
// treated as zero.
class EllipticalSpec {
 public:
  EllipticalSpec(Eigen::VectorXd mu, Eigen::MatrixXd sigma,
                 RadialFamily family);

  int p() const { return static_cast<int>(mu_.size()); }
  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& sigma_sqrt() const { return sigma_sqrt_; }
  const Eigen::MatrixXd& correlation() const { return correlation_; }
  const RadialFamily& family() const { return family_; }
  bool sigma_diagonal() const { return sigma_diagonal_; }

  // Precision matrix, computed on first use. Throws if sigma is singular.
  const Eigen::MatrixXd& omega() const;

 private:
  Eigen::VectorXd mu_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd sigma_sqrt_;
  Eigen::MatrixXd correlation_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  RadialFamily family_;
  bool sigma_diagonal_ = false;
  mutable std::optional<Eigen::MatrixXd> omega_;
};

// theta_m = p^{-m} E[xi^{2m}] = r_m * prod_{j=0}^{m-1} (1 + 2j/p). Throws when
// the family lacks the moment.
double theoretical_theta(const RadialFamily& family, int p, MomentOrder m);

// Uniform draw on the unit sphere in R^p.
Eigen::VectorXd sample_sphere(int p, RngStream& rng);

// Draw of the radial factor xi (nonnegative, E[xi^2] = p).
double sample_radial(const RadialFamily& family, int p, RngStream& rng);

// n independent rows. Consumes the stream row by row (p sphere normals, then
// the radial draw), so output is reproducible for a given stream.
SampleMatrix sample(const EllipticalSpec& spec, int n, RngStream& rng);

// Same, also reporting the drawn xi_i^2 per row.
SampleMatrix sample_with_radials(const EllipticalSpec& spec, int n,
                                 RngStream& rng, Eigen::VectorXd& xi_sq_out);

Eigen::MatrixXd covariance_identity(int p);
// Sigma_ij = a^{|i-j|}.
Eigen::MatrixXd covariance_banded(int p, double a);
// Unit-diagonal blocks of the given size with constant within-block
// correlation rho; the last block truncates when p is not a multiple.
Eigen::MatrixXd covariance_block_diag(int p, int block_size, double rho);
// Reads the square CSV covariance format and validates symmetry and positive
// semidefiniteness; rejects with an eigenvalue report otherwise.
Eigen::MatrixXd covariance_from_file(const std::string& path);

}  // namespace ellmom
