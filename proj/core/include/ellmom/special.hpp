#pragma once

#include <optional>

#include "ellmom/blocks.hpp"
#include "ellmom/radial.hpp"
#include "ellmom/types.hpp"

namespace ellmom {

// (2k-1)!! = E[X^{2k}] for X standard normal. Integer-exact through k = 20.
double gaussian_even_moment(int k);

// E[(chi^2_p)^m] = prod_{j=0}^{m-1} (p + 2j). Switches to log space when the
// product would leave the representable range.
double chi_square_even_moment(double p, int m);

// c_m = (2m-1)!! * p^m / prod_{j=0}^{m-1}(p + 2j), the marginal moment
// constant. Evaluated as a telescoping product of p / (p + 2j) factors, so no
// Gamma calls and no overflow for any practical p.
double marginal_constant(double p, int m);

// c*_{m,K}, the blockwise constant for a block of size K inside dimension p.
// c*_{1,K} = K and c*_{m,K} = p (K + 2m - 2) / (p + 2m - 2) * c*_{m-1,K}.
double block_constant(double p, int K, int m);

// r_k = E[xi^{2k}] / E[chi_p^{2k}]. Gaussian: 1. StudentT(nu):
// (nu-2)^k / prod_{j=1}^{k}(nu - 2j), finite only for 2k < nu. Custom
// families must supply moment_ratio.
double radial_moment_ratio(const RadialFamily& family, int p, int k);

// h_m(k) = k * var((chi_k)^{2m}) / (E[(chi_k)^{2m}])^2. Decreasing in k with
// limit 2m^2.
double h_factor(double k, int m);

// h-bar over a block collection: (p / N^2) * sum_J h_m(|J|) / |J| with
// N = number of blocks.
double block_division_factor(const BlockCollection& blocks, int p,
                             MomentOrder m);

// Leading-order covariance of X1^{2m} and X2^{2m} for standard bivariate
// normal with correlation rho, as the finite double sum
//   beta_m(rho) = sum_{s=2}^{m} B_m(s) (1 - |rho|)^{m-s} |rho|^s,
//   B_m(s) = sum_{k1+k2=s} C(2m,2k1) C(2m,2k2) eta_{m-k1} eta_{m-k2}
//            (eta_s - eta_{k1} eta_{k2}),
// with eta_j = (2j-1)!!. At m = 2 this is exactly 72 rho^2. Note this is the
// small-|rho| expansion, not the full polynomial: the exact covariance picks
// up higher even powers (72 rho^2 + 24 rho^4 at m = 2).
double bivariate_normal_power_cov(double rho, int m);

struct VarianceDecomposition {
  double dominating = 0.0;
  double second_order = 0.0;
  double correlation_term = 0.0;
  double total = 0.0;
};

// Predicted n * var(theta_hat) / theta_m^2 pieces for the ideal estimator:
// dominating (1/n)(r_2m - r_m^2)/r_m^2, dimension term (1/np)(r_2m/r_m^2)
// h_m(p), no correlation term.
VarianceDecomposition variance_oracle_ie(const RadialFamily& family, int p,
                                         int n, MomentOrder m);

// Marginal-average oracle. corr_offdiag_fro_sq is the squared Frobenius norm
// of the off-diagonal part of the correlation matrix. The cross-coordinate
// constant is audited only at m = 2 (value 72); other orders must pass it in.
VarianceDecomposition variance_oracle_mae(
    const RadialFamily& family, double corr_offdiag_fro_sq, int p, int n,
    MomentOrder m, std::optional<double> cross_constant = std::nullopt);

// Block-average oracle. cross_norm_sum aggregates the cross-block correlation
// norms (zero for block-diagonal truth), scaled by the caller-supplied
// constant; cross_constant may be omitted only when cross_norm_sum is zero.
VarianceDecomposition variance_oracle_bae(
    const RadialFamily& family, const BlockCollection& blocks, int p, int n,
    MomentOrder m, double cross_norm_sum = 0.0,
    std::optional<double> cross_constant = std::nullopt);

// Standard normal quantile (AS 241, double precision throughout).
double normal_quantile(double prob);

}  // namespace ellmom
