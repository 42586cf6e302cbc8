#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "polytrope/error.hpp"

namespace polytrope {

/// Polytropic index n of P = K rho^(1 + 1/n), restricted to 0 <= n <= 5.
class PolytropicIndex {
 public:
  explicit PolytropicIndex(double n) : n_(n) {
    if (!std::isfinite(n) || n < 0.0 || n > 5.0) {
      throw DomainError("polytropic index must satisfy 0 <= n <= 5 (got " +
                        std::to_string(n) +
                        "); for n > 5 the central density diverges");
    }
  }

  double value() const { return n_; }

  bool has_finite_surface() const { return n_ < 5.0; }
  bool omega_defined() const { return !is_one(); }

  bool is_zero() const { return n_ == 0.0; }
  bool is_one() const { return std::abs(n_ - 1.0) < kExactTol; }
  bool is_three() const { return std::abs(n_ - 3.0) < kExactTol; }
  bool is_five() const { return n_ == 5.0; }

  /// Scaling weight 2/(n-1); infinite at n = 1.
  double omega_tilde() const {
    if (is_one()) return std::numeric_limits<double>::infinity();
    return 2.0 / (n_ - 1.0);
  }

  friend bool operator==(const PolytropicIndex&, const PolytropicIndex&) = default;

  static constexpr double kExactTol = 1e-12;

 private:
  double n_;
};

}  // namespace polytrope
