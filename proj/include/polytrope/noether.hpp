#pragma once

// Scaling charge of the Lane-Emden Lagrangian and its radial
// non-conservation law, in units with the H_c^2/G prefactor removed:
//
//   g(xi)  = xi^2 [ xi (theta'^2/2 + theta^(n+1)/(n+1)) + wt theta theta' ]
//   dg/dxi = (1 - 2 wt) L,   L = xi^2 (theta^(n+1)/(n+1) - theta'^2/2)
//
// with wt = 2/(n-1), so 1 - 2 wt = (n-5)/(n-1). The law is exact only at
// n = 5, where g vanishes on the regular solution.

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "polytrope/error.hpp"
#include "polytrope/invariants.hpp"
#include "polytrope/lane_emden.hpp"

namespace polytrope {

namespace detail {

inline void require_omega(const EmdenSolution& sol) {
  if (!sol.index().omega_defined()) throw DomainError("omega undefined for n=1");
}

inline void require_in_star(const EmdenSolution& sol, double xi) {
  if (!(xi >= 0.0)) throw DomainError("xi must be non-negative");
  const double end = sol.has_surface() ? *sol.xi1() : sol.xi_end();
  if (xi > end) throw DomainError("xi = " + std::to_string(xi) + " outside the solution");
}

inline double theta_power_np1(double theta, double n) {
  return theta * density_power(theta, n);
}

}  // namespace detail

struct NoetherTerms {
  double internal;       // xi^2 theta^(n+1)/(n+1)
  double gravitational;  // xi^2 theta'^2/2
  double lagrangian() const { return internal - gravitational; }
};

inline NoetherTerms noether_terms(const EmdenSolution& sol, double xi) {
  detail::require_in_star(sol, xi);
  const double n = sol.n();
  const auto t = sol.evaluate(xi);
  const double x2 = xi * xi;
  return {x2 * detail::theta_power_np1(t.theta, n) / (n + 1.0), 0.5 * x2 * t.dtheta * t.dtheta};
}

inline double noether_charge(const EmdenSolution& sol, double xi) {
  detail::require_omega(sol);
  detail::require_in_star(sol, xi);
  const double n = sol.n();
  const double wt = sol.index().omega_tilde();
  const auto t = sol.evaluate(xi);
  const double a = 0.5 * t.dtheta * t.dtheta + detail::theta_power_np1(t.theta, n) / (n + 1.0);
  return xi * xi * (xi * a + wt * t.theta * t.dtheta);
}

/// Right-hand side of the non-conservation law.
inline double noether_rhs(const EmdenSolution& sol, double xi) {
  detail::require_omega(sol);
  const double n = sol.n();
  return (n - 5.0) / (n - 1.0) * noether_terms(sol, xi).lagrangian();
}

/// dg/dxi from the chain rule with theta'' eliminated by the Lane-Emden
/// equation, without using the non-conservation law.
inline double noether_charge_derivative(const EmdenSolution& sol, double xi) {
  detail::require_omega(sol);
  detail::require_in_star(sol, xi);
  const double n = sol.n();
  const double wt = sol.index().omega_tilde();
  const auto t = sol.evaluate(xi);
  const double p = detail::theta_power_np1(t.theta, n);
  const double d2 = t.dtheta * t.dtheta;
  const double x2 = xi * xi;
  return 3.0 * x2 * (0.5 * d2 + p / (n + 1.0)) - 2.0 * x2 * d2 + wt * x2 * (d2 - p);
}

struct NoetherDiagnostics {
  std::vector<double> xi;
  std::vector<double> g;
  std::vector<double> dg_numeric;   // fourth-order differences, step h
  std::vector<double> dg_analytic;
  std::vector<double> rhs;
  std::vector<double> residual;  // dg_numeric - rhs
  std::vector<double> rhs_integral;       // int_0^xi rhs
  std::vector<double> integral_residual;  // g - rhs_integral
  std::vector<double> internal;
  std::vector<double> gravitational;
  double max_residual = 0.0;
  double max_integral_residual = 0.0;
};

/// Cumulative integral of f over [0, x] at each grid point, integrated
/// piecewise between solver nodes where the interpolant is a polynomial.
template <class F>
std::vector<double> cumulative_integral(const EmdenSolution& sol, F&& f,
                                        const std::vector<double>& grid) {
  using boost::math::quadrature::gauss_kronrod;
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return grid[a] < grid[b]; });

  std::vector<double> breaks;
  for (const auto& node : sol.grid()) breaks.push_back(node.xi);

  auto integrate = [&](double a, double b) {
    double total = 0.0;
    auto it = std::upper_bound(breaks.begin(), breaks.end(), a);
    for (double lo = a; lo < b; ++it) {
      const double hi = it == breaks.end() ? b : std::min(*it, b);
      total += gauss_kronrod<double, 15>::integrate(f, lo, hi, 10, 1e-14);
      lo = hi;
    }
    return total;
  };

  std::vector<double> out(grid.size());
  double acc = 0.0, prev = 0.0;
  for (std::size_t k : order) {
    acc += integrate(prev, grid[k]);
    prev = grid[k];
    out[k] = acc;
  }
  return out;
}

inline NoetherDiagnostics nonconservation_residual(const EmdenSolution& sol,
                                                   const std::vector<double>& xi_grid,
                                                   double h = 1e-4) {
  detail::require_omega(sol);
  const double end = sol.has_surface() ? *sol.xi1() : sol.xi_end();
  NoetherDiagnostics d;
  d.xi = xi_grid;
  // g is odd in xi, which extends the stencil through the centre.
  auto g = [&](double x) { return x < 0.0 ? -noether_charge(sol, -x) : noether_charge(sol, x); };
  for (double xi : xi_grid) {
    detail::require_in_star(sol, xi);
    d.g.push_back(g(xi));
    double dg;
    if (xi + 2.0 * h > end) {
      dg = (25.0 * g(xi) - 48.0 * g(xi - h) + 36.0 * g(xi - 2 * h) - 16.0 * g(xi - 3 * h) +
            3.0 * g(xi - 4 * h)) /
           (12.0 * h);
    } else {
      dg = (g(xi - 2 * h) - 8.0 * g(xi - h) + 8.0 * g(xi + h) - g(xi + 2 * h)) / (12.0 * h);
    }
    d.dg_numeric.push_back(dg);
    d.dg_analytic.push_back(noether_charge_derivative(sol, xi));
    const auto terms = noether_terms(sol, xi);
    d.internal.push_back(terms.internal);
    d.gravitational.push_back(terms.gravitational);
    d.rhs.push_back((sol.n() - 5.0) / (sol.n() - 1.0) * terms.lagrangian());
    d.residual.push_back(dg - d.rhs.back());
    d.max_residual = std::max(d.max_residual, std::abs(d.residual.back()));
  }
  d.rhs_integral =
      cumulative_integral(sol, [&](double x) { return noether_rhs(sol, x); }, xi_grid);
  for (std::size_t i = 0; i < xi_grid.size(); ++i) {
    d.integral_residual.push_back(d.g[i] - d.rhs_integral[i]);
    d.max_integral_residual =
        std::max(d.max_integral_residual, std::abs(d.integral_residual.back()));
  }
  return d;
}

struct G5Check {
  double max_abs_g;
  double max_abs_invariant;  // (u v^3)^(1/2) (1 - v - u/3)
  double max_pressure_identity;  // |v + u/3 - 1|
  double max_slope_identity;     // |theta' + xi theta^3/3|
};

inline G5Check g5_conservation_check(const EmdenSolution& sol, const std::vector<double>& xi_grid) {
  if (!sol.index().is_five()) throw DomainError("g5_conservation_check needs n = 5");
  G5Check c{0.0, 0.0, 0.0, 0.0};
  for (double xi : xi_grid) {
    c.max_abs_g = std::max(c.max_abs_g, std::abs(noether_charge(sol, xi)));
    const auto t = sol.evaluate(xi);
    c.max_slope_identity = std::max(
        c.max_slope_identity, std::abs(t.dtheta + xi * t.theta * t.theta * t.theta / 3.0));
    if (xi == 0.0) continue;
    const auto hs = invariants_at(sol, xi);
    const double combo = std::sqrt(hs.u * hs.v * hs.v * hs.v) * (1.0 - hs.v - hs.u / 3.0);
    c.max_abs_invariant = std::max(c.max_abs_invariant, std::abs(combo));
    c.max_pressure_identity =
        std::max(c.max_pressure_identity, std::abs(hs.v + hs.u / 3.0 - 1.0));
  }
  return c;
}

}  // namespace polytrope
