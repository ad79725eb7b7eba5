#pragma once

#include <stdexcept>

namespace ellmom {

// Order of the scaled even moment theta_m. Wrapped so an order of zero or a
// negative value cannot slip into an estimator call unnoticed.
class MomentOrder {
 public:
  explicit MomentOrder(int m) : m_(m) {
    if (m < 1) throw std::invalid_argument("MomentOrder: m must be >= 1");
  }
  int value() const { return m_; }

 private:
  int m_;
};

}  // namespace ellmom
