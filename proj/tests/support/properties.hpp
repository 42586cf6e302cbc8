#pragma once

// Property checks shared by the unit tests and the acceptance runner. Each
// returns the worst observed deviation so callers can apply their own limit.

#include <algorithm>
#include <cmath>
#include <vector>

#include "polytrope/invariants.hpp"
#include "polytrope/lane_emden.hpp"
#include "polytrope/stellar.hpp"

namespace props {

inline std::vector<double> interior_samples(const polytrope::EmdenSolution& sol, std::size_t count,
                                            double lo_frac = 0.01, double hi_frac = 0.99) {
  const double end = sol.has_surface() ? *sol.xi1() : sol.xi_end();
  std::vector<double> xs;
  for (std::size_t i = 0; i < count; ++i) {
    const double f = lo_frac + (hi_frac - lo_frac) * static_cast<double>(i) / (count - 1);
    xs.push_back(f * end);
  }
  return xs;
}

/// max relative |(u v^n)^(1/(n-1)) / (-xi^(1+w~) theta') - 1| over 100 samples.
inline double omega_identity(const polytrope::EmdenSolution& sol) {
  double worst = 0.0;
  for (double xi : interior_samples(sol, 100)) {
    const auto h = polytrope::invariants_at(sol, xi);
    const double slope = polytrope::omega_from_slope(sol, xi);
    worst = std::max(worst, std::abs(*h.omega / slope - 1.0));
  }
  return worst;
}

/// Worst residual of du/dlog xi = u(3-u-w) and dw/dlog xi = w(u-1+w/n),
/// with the left sides from centred differences of the invariants, scaled
/// by the magnitude of the right side.
inline double characteristic_system(const polytrope::EmdenSolution& sol) {
  const double n = sol.n();
  const double h = 1e-4;
  double worst = 0.0;
  for (double xi : interior_samples(sol, 60, 0.05, 0.9)) {
    auto at = [&](double s) { return polytrope::invariants_at(sol, xi * std::exp(s)); };
    const auto p2 = at(2 * h), p1 = at(h), m1 = at(-h), m2 = at(-2 * h), c = at(0.0);
    auto d = [&](double a2, double a1, double b1, double b2) {
      return (-a2 + 8 * a1 - 8 * b1 + b2) / (12 * h);
    };
    const double du = d(p2.u, p1.u, m1.u, m2.u);
    const double rhs_u = c.u * (3 - c.u - c.w);
    worst = std::max(worst, std::abs(du - rhs_u) / std::max(1.0, std::abs(rhs_u)));
    if (n > 0.0) {
      const double dw = d(p2.w, p1.w, m1.w, m2.w);
      const double rhs_w = c.w * (c.u - 1 + c.w / n);
      worst = std::max(worst, std::abs(dw - rhs_w) / std::max(1.0, std::abs(rhs_w)));
    }
  }
  return worst;
}

/// Coefficient of xi^4 in mean-density/rho_c - (rho/rho_c)^(3/5) from the
/// series of theta.
inline double origin_relation_c4(double n) {
  const double a1 = -1.0 / 6, a2 = n / 120.0, a3 = -n * (8 * n - 5) / 15120.0;
  const double m = 0.6 * n;
  return -18 * a3 - m * a2 - m * (m - 1) / 2 * a1 * a1;
}

/// [mean density/rho_c - (rho/rho_c)^(3/5)] / xi^4 at a small radius.
inline double origin_relation_ratio(const polytrope::EmdenSolution& sol, double xi) {
  const auto t = sol.evaluate(xi);
  const double mean = -3.0 * t.dtheta / xi;
  const double rho = polytrope::detail::density_power(t.theta, sol.n());
  return (mean - std::pow(rho, 0.6)) / std::pow(xi, 4);
}

/// Slope d log R / d log M over a fixed-K family with varying central density.
inline double mass_radius_slope(const polytrope::PolytropicIndex& index, double K) {
  const auto sol = polytrope::integrate_emden(index, 1e-12);
  const auto a = polytrope::build_model(sol, K, 1e3);
  const auto b = polytrope::build_model(sol, K, 1e5);
  return std::log(b.R / a.R) / std::log(b.M / a.M);
}

/// Relative spread of M over a fixed-K family (zero when M is independent of rho_c).
inline double mass_spread(const polytrope::PolytropicIndex& index, double K) {
  const auto sol = polytrope::integrate_emden(index, 1e-12);
  const auto a = polytrope::build_model(sol, K, 1e3);
  const auto b = polytrope::build_model(sol, K, 1e6);
  return std::abs(b.M / a.M - 1.0);
}

}  // namespace props
