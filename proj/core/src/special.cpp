#include "ellmom/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ellmom {

double gaussian_even_moment(int k) {
  if (k < 0) throw std::invalid_argument("gaussian_even_moment: k must be >= 0");
#if defined(__SIZEOF_INT128__)
  if (k <= 20) {
    unsigned __int128 acc = 1;
    for (int j = 1; j <= k; ++j) acc *= static_cast<unsigned>(2 * j - 1);
    return static_cast<double>(acc);
  }
#endif
  double acc = 1.0;
  for (int j = 1; j <= k; ++j) acc *= 2.0 * j - 1.0;
  return acc;
}

double chi_square_even_moment(double p, int m) {
  if (!(p > 0.0))
    throw std::invalid_argument("chi_square_even_moment: p must be > 0");
  if (m < 0) throw std::invalid_argument("chi_square_even_moment: m must be >= 0");
  if (m > 0 && static_cast<double>(m) * std::log(p + 2.0 * m) > 690.0) {
    double log_sum = 0.0;
    for (int j = 0; j < m; ++j) log_sum += std::log(p + 2.0 * j);
    return std::exp(log_sum);
  }
  double acc = 1.0;
  for (int j = 0; j < m; ++j) acc *= p + 2.0 * j;
  return acc;
}

double marginal_constant(double p, int m) {
  if (!(p > 0.0)) throw std::invalid_argument("marginal_constant: p must be > 0");
  if (m < 1) throw std::invalid_argument("marginal_constant: m must be >= 1");
  double acc = gaussian_even_moment(m);
  for (int j = 0; j < m; ++j) acc *= p / (p + 2.0 * j);
  return acc;
}

double block_constant(double p, int K, int m) {
  if (!(p >= 1.0)) throw std::invalid_argument("block_constant: p must be >= 1");
  if (K < 1 || static_cast<double>(K) > p)
    throw std::invalid_argument("block_constant: K must be in [1, p]");
  if (m < 1) throw std::invalid_argument("block_constant: m must be >= 1");
  double acc = static_cast<double>(K);
  for (int j = 2; j <= m; ++j)
    acc *= p * (K + 2.0 * j - 2.0) / (p + 2.0 * j - 2.0);
  return acc;
}

double radial_moment_ratio(const RadialFamily& family, int p, int k) {
  validate_radial(family);
  if (p < 1) throw std::invalid_argument("radial_moment_ratio: p must be >= 1");
  if (k < 1) throw std::invalid_argument("radial_moment_ratio: k must be >= 1");
  if (std::holds_alternative<GaussianRadial>(family)) return 1.0;
  if (const auto* t = std::get_if<StudentTRadial>(&family)) {
    if (!(t->nu > 2.0 * k))
      throw std::domain_error(
          "radial_moment_ratio: moment of this order is infinite for "
          "StudentT with nu <= 2k");
    double acc = 1.0;
    for (int j = 1; j <= k; ++j) acc *= (t->nu - 2.0) / (t->nu - 2.0 * j);
    return acc;
  }
  const auto& custom = std::get<CustomRadial>(family);
  if (k > custom.max_even_moment)
    throw std::domain_error("radial_moment_ratio: moment order exceeds the "
                            "declared finite range of the custom family");
  if (!custom.moment_ratio)
    throw std::invalid_argument(
        "radial_moment_ratio: custom family has no analytic moment_ratio");
  return custom.moment_ratio(p, k);
}

double h_factor(double k, int m) {
  if (!(k >= 1.0)) throw std::invalid_argument("h_factor: k must be >= 1");
  if (m < 1) throw std::invalid_argument("h_factor: m must be >= 1");
  // E[(chi_k)^{4m}] / E[(chi_k)^{2m}]^2. A single division keeps small-k
  // values exact (h_2(1) is 32/3 to the last bit); the factorwise ratio is
  // the fallback when the products overflow.
  double num = 1.0;
  double den = 1.0;
  for (int j = 0; j < m; ++j) {
    num *= k + 2.0 * (m + j);
    den *= k + 2.0 * j;
  }
  double ratio = num / den;
  if (!std::isfinite(ratio)) {
    ratio = 1.0;
    for (int j = 0; j < m; ++j) ratio *= (k + 2.0 * (m + j)) / (k + 2.0 * j);
  }
  return k * (ratio - 1.0);
}

double block_division_factor(const BlockCollection& blocks, int p,
                             MomentOrder m) {
  if (p < 1) throw std::invalid_argument("block_division_factor: p must be >= 1");
  double sum = 0.0;
  for (const auto& block : blocks.blocks()) {
    double size = static_cast<double>(block.size());
    sum += h_factor(size, m.value()) / size;
  }
  double n_blocks = static_cast<double>(blocks.size());
  return p / (n_blocks * n_blocks) * sum;
}

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double acc = 1.0;
  for (int j = 1; j <= k; ++j) acc = acc * (n - k + j) / j;
  return acc;
}

}  // namespace

double bivariate_normal_power_cov(double rho, int m) {
  if (!(rho >= -1.0 && rho <= 1.0))
    throw std::invalid_argument("bivariate_normal_power_cov: rho must be in [-1, 1]");
  if (m < 2)
    throw std::invalid_argument("bivariate_normal_power_cov: m must be >= 2");
  double a = std::abs(rho);
  double value = 0.0;
  for (int s = 2; s <= m; ++s) {
    double coeff = 0.0;
    for (int k1 = 1; k1 < s; ++k1) {
      int k2 = s - k1;
      if (k2 < 1 || k2 > m || k1 > m) continue;
      coeff += binomial(2 * m, 2 * k1) * binomial(2 * m, 2 * k2) *
               gaussian_even_moment(m - k1) * gaussian_even_moment(m - k2) *
               (gaussian_even_moment(s) -
                gaussian_even_moment(k1) * gaussian_even_moment(k2));
    }
    value += coeff * std::pow(1.0 - a, m - s) * std::pow(a, s);
  }
  return value;
}

namespace {

void check_oracle_inputs(const RadialFamily& family, int p, int n,
                         MomentOrder m) {
  validate_radial(family);
  if (p < 1) throw std::invalid_argument("variance oracle: p must be >= 1");
  if (n < 1) throw std::invalid_argument("variance oracle: n must be >= 1");
  if (max_finite_even_moment(family) < 2 * m.value())
    throw std::domain_error(
        "variance oracle: the family lacks finite moments to order 2m");
}

VarianceDecomposition assemble(double dominating, double second_order,
                               double correlation_term) {
  VarianceDecomposition out;
  out.dominating = dominating;
  out.second_order = second_order;
  out.correlation_term = correlation_term;
  out.total = dominating + second_order + correlation_term;
  return out;
}

}  // namespace

VarianceDecomposition variance_oracle_ie(const RadialFamily& family, int p,
                                         int n, MomentOrder m) {
  check_oracle_inputs(family, p, n, m);
  double rm = radial_moment_ratio(family, p, m.value());
  double r2m = radial_moment_ratio(family, p, 2 * m.value());
  double dominating = (r2m - rm * rm) / (n * rm * rm);
  double second = r2m / (rm * rm) * h_factor(p, m.value()) /
                  (static_cast<double>(n) * p);
  return assemble(dominating, second, 0.0);
}

VarianceDecomposition variance_oracle_mae(const RadialFamily& family,
                                          double corr_offdiag_fro_sq, int p,
                                          int n, MomentOrder m,
                                          std::optional<double> cross_constant) {
  check_oracle_inputs(family, p, n, m);
  if (!(corr_offdiag_fro_sq >= 0.0))
    throw std::invalid_argument("variance_oracle_mae: negative norm");
  double c_m;
  if (cross_constant) {
    c_m = *cross_constant;
  } else if (m.value() == 2) {
    c_m = 72.0;
  } else {
    throw std::invalid_argument(
        "variance_oracle_mae: cross constant is audited only at m = 2; pass "
        "cross_constant explicitly for other orders");
  }
  double rm = radial_moment_ratio(family, p, m.value());
  double r2m = radial_moment_ratio(family, p, 2 * m.value());
  double eta_m = gaussian_even_moment(m.value());
  double dominating = (r2m - rm * rm) / (n * rm * rm);
  double second = r2m / (rm * rm) * h_factor(1.0, m.value()) /
                  (static_cast<double>(n) * p);
  double correlation = c_m / n * r2m / (rm * rm * eta_m * eta_m) *
                       corr_offdiag_fro_sq / (static_cast<double>(p) * p);
  return assemble(dominating, second, correlation);
}

VarianceDecomposition variance_oracle_bae(const RadialFamily& family,
                                          const BlockCollection& blocks, int p,
                                          int n, MomentOrder m,
                                          double cross_norm_sum,
                                          std::optional<double> cross_constant) {
  check_oracle_inputs(family, p, n, m);
  if (!(cross_norm_sum >= 0.0))
    throw std::invalid_argument("variance_oracle_bae: negative norm");
  if (cross_norm_sum > 0.0 && !cross_constant)
    throw std::invalid_argument(
        "variance_oracle_bae: nonzero cross-block norms need an explicit "
        "cross_constant");
  double rm = radial_moment_ratio(family, p, m.value());
  double r2m = radial_moment_ratio(family, p, 2 * m.value());
  double dominating = (r2m - rm * rm) / (n * rm * rm);
  double second = r2m / (rm * rm) * block_division_factor(blocks, p, m) /
                  (static_cast<double>(n) * p);
  double n_blocks = static_cast<double>(blocks.size());
  double correlation =
      cross_norm_sum > 0.0
          ? *cross_constant / n * cross_norm_sum / (n_blocks * n_blocks)
          : 0.0;
  return assemble(dominating, second, correlation);
}

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw std::invalid_argument("normal_quantile: prob must be in (0, 1)");
  // Wichura's algorithm AS 241, PPND16.
  double q = prob - 0.5;
  if (std::abs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
              6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
            1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
          1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? prob : 1.0 - prob;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

}  // namespace ellmom
