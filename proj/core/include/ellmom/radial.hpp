#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <variant>

namespace ellmom {

class RngStream;

// Radial mixing laws for Y = mu + xi * sqrt_sigma * U, normalized E[xi^2] = p.
struct GaussianRadial {};

struct StudentTRadial {
  double nu;  // degrees of freedom, must exceed 2 so the normalization exists
};

// User supplied radial law. The sampler must return xi >= 0 with E[xi^2] = p.
// max_even_moment is the largest k with E[xi^{2k}] finite; moment_ratio, when
// given, returns E[xi^{2k}] / E[chi_p^{2k}] analytically.
struct CustomRadial {
  std::function<double(int p, RngStream&)> sampler;
  int max_even_moment = std::numeric_limits<int>::max();
  std::function<double(int p, int k)> moment_ratio;
};

using RadialFamily = std::variant<GaussianRadial, StudentTRadial, CustomRadial>;

inline void validate_radial(const RadialFamily& family) {
  if (const auto* t = std::get_if<StudentTRadial>(&family)) {
    if (!(t->nu > 2.0))
      throw std::invalid_argument("StudentTRadial: nu must be > 2");
  } else if (const auto* c = std::get_if<CustomRadial>(&family)) {
    if (!c->sampler)
      throw std::invalid_argument("CustomRadial: sampler must be set");
  }
}

// Largest k for which E[xi^{2k}] is finite.
inline int max_finite_even_moment(const RadialFamily& family) {
  if (std::holds_alternative<GaussianRadial>(family))
    return std::numeric_limits<int>::max();
  if (const auto* t = std::get_if<StudentTRadial>(&family)) {
    // E[xi^{2k}] needs nu > 2k.
    double half = t->nu / 2.0;
    int k = static_cast<int>(half);
    if (static_cast<double>(k) == half) --k;  // strict inequality
    return k;
  }
  return std::get<CustomRadial>(family).max_even_moment;
}

}  // namespace ellmom
