#pragma once

// Regular (Emden) solutions of the Lane-Emden equation
//
//     (xi^2 theta')' + xi^2 theta^n = 0,   theta(0) = 1, theta'(0) = 0,
//
// integrated outward from a Taylor-series start to the first zero xi_1.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "polytrope/error.hpp"
#include "polytrope/index.hpp"
#include "polytrope/numeric/dop853.hpp"
#include "polytrope/numeric/roots.hpp"

namespace polytrope {

struct ThetaValue {
  double theta;
  double dtheta;
};

namespace detail {

// Taylor series through xi^6, no range check.
inline ThetaValue emden_series(double n, double xi) {
  const double x2 = xi * xi;
  const double c4 = n / 120.0;
  const double c6 = -n * (8.0 * n - 5.0) / 15120.0;
  return {1.0 + x2 * (-1.0 / 6.0 + x2 * (c4 + x2 * c6)),
          xi * (-1.0 / 3.0 + x2 * (4.0 * c4 + x2 * 6.0 * c6))};
}

// theta^n with theta clamped at zero from above; n = 0 keeps the constant
// density so the exact solution 1 - xi^2/6 continues smoothly past xi_1.
inline double density_power(double theta, double n) {
  if (n == 0.0) return 1.0;
  if (theta <= 0.0) return 0.0;
  return std::exp(n * std::log(theta));
}

}  // namespace detail

/// Series values (theta, theta') at a small radius 0 < xi0 <= 0.1.
inline ThetaValue series_start(const PolytropicIndex& index, double xi0) {
  if (!(xi0 > 0.0 && xi0 <= 0.1)) {
    throw DomainError("series_start requires 0 < xi0 <= 0.1 (got " +
                      std::to_string(xi0) + ")");
  }
  return detail::emden_series(index.value(), xi0);
}

struct EmdenOptions {
  double tol = 1e-12;
  double xi_max = 100.0;        // integration end for n = 5
  double xi_start = 1e-3;       // hand-over point from the series
  double hard_cutoff = 1e6;     // give up looking for xi_1 beyond this radius
  double root_xtol = 1e-12;
  double max_step_rel = 0.1;    // keeps the interpolant's derivative accurate
};

/// Dense numerical Emden function. Immutable after construction.
class EmdenSolution {
 public:
  struct Node {
    double xi;
    double theta;
    double dtheta;
  };

  EmdenSolution(PolytropicIndex index, numeric::DenseTrajectory<2> trajectory,
                double xi_start, std::optional<double> xi1, double tol)
      : index_(index),
        trajectory_(std::move(trajectory)),
        xi_start_(xi_start),
        xi1_(xi1),
        tol_(tol) {
    grid_.push_back({0.0, 1.0, 0.0});
    for (const auto& node : trajectory_.nodes()) {
      grid_.push_back({node.t, node.y[0], node.y[1]});
    }
    if (xi1_) grid_.back().theta = 0.0;
  }

  const PolytropicIndex& index() const { return index_; }
  double n() const { return index_.value(); }
  double tol() const { return tol_; }

  /// Solver-chosen nodes, starting with the centre and (for n < 5) ending at xi_1.
  const std::vector<Node>& grid() const { return grid_; }

  /// First zero; absent for n = 5.
  const std::optional<double>& xi1() const { return xi1_; }
  bool has_surface() const { return xi1_.has_value(); }

  /// Largest radius covered by the dense output.
  double xi_end() const { return grid_.back().xi; }

  ThetaValue evaluate(double xi) const {
    check_range(xi);
    if (xi <= xi_start_) return detail::emden_series(n(), xi);
    const auto y = trajectory_.value(xi);
    return {y[0], y[1]};
  }

  double theta(double xi) const { return evaluate(xi).theta; }
  double dtheta(double xi) const { return evaluate(xi).dtheta; }

  /// theta'' taken from the derivative of the interpolant (not from the ODE).
  double d2theta(double xi) const {
    check_range(xi);
    if (xi <= xi_start_) {
      const double n_ = n(), x2 = xi * xi;
      return -1.0 / 3.0 + x2 * (12.0 * n_ / 120.0 -
                                x2 * 30.0 * n_ * (8.0 * n_ - 5.0) / 15120.0);
    }
    return trajectory_.derivative(xi)[1];
  }

  /// Uniform resampling on [xi_lo, xi_hi] with `count` points.
  std::vector<Node> resample(double xi_lo, double xi_hi, std::size_t count) const {
    if (count < 2) throw DomainError("resample needs at least two points");
    std::vector<Node> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double xi = i + 1 == count
                            ? xi_hi
                            : xi_lo + (xi_hi - xi_lo) * static_cast<double>(i) /
                                          static_cast<double>(count - 1);
      const auto v = evaluate(xi);
      out.push_back({xi, v.theta, v.dtheta});
    }
    return out;
  }

  std::vector<Node> resample(std::size_t count) const {
    return resample(0.0, xi_end(), count);
  }

 private:
  void check_range(double xi) const {
    if (!(xi >= 0.0 && xi <= xi_end())) {
      throw DomainError("xi = " + std::to_string(xi) + " outside [0, " +
                        std::to_string(xi_end()) + "]");
    }
  }

  PolytropicIndex index_;
  numeric::DenseTrajectory<2> trajectory_;
  double xi_start_;
  std::optional<double> xi1_;
  double tol_;
  std::vector<Node> grid_;
};

/// Adaptive DOP853 integration from the series start to the first zero of
/// theta (n < 5) or to opts.xi_max (n = 5).
inline EmdenSolution integrate_emden(const PolytropicIndex& index,
                                     const EmdenOptions& opts = {}) {
  if (!(opts.tol >= 1e-14 && opts.tol <= 1e-6)) {
    throw DomainError("tolerance must lie in [1e-14, 1e-6]");
  }
  const double n = index.value();
  if (index.is_five() && !(opts.xi_max > opts.xi_start)) {
    throw DomainError("n = 5 needs xi_max > 0");
  }
  const double xi0 = opts.xi_start;
  const auto start = series_start(index, xi0);

  auto rhs = [n](double xi, const numeric::State<2>& y) -> numeric::State<2> {
    return {y[1], -detail::density_power(y[0], n) - 2.0 * y[1] / xi};
  };

  numeric::OdeOptions ode;
  ode.rtol = opts.tol;
  ode.atol = opts.tol;
  ode.max_step_rel = opts.max_step_rel;

  const double xi_end = index.is_five() ? opts.xi_max : opts.hard_cutoff;
  const bool want_surface = index.has_finite_surface();
  auto traj = numeric::integrate_dop853<2>(
      rhs, xi0, {start.theta, start.dtheta}, xi_end, ode,
      [want_surface](double, const numeric::State<2>& y) {
        return want_surface && y[0] <= 0.0;
      });

  std::optional<double> xi1;
  if (want_surface) {
    const auto& nodes = traj.nodes();
    if (nodes.back().y[0] > 0.0) {
      throw NumericalError("no zero of theta found before xi = " +
                           std::to_string(xi_end) +
                           "; n is too close to 5 for this cutoff");
    }
    const double a = nodes[nodes.size() - 2].t;
    const auto ya = nodes[nodes.size() - 2].y;
    const double b = nodes.back().t;
    numeric::RootOptions ro;
    ro.xtol = opts.root_xtol * std::max(1.0, b);
    double root = numeric::find_root_bracketed(
        [&traj](double xi) { return traj.value(xi)[0]; }, a, b, ro);

    // The crossing step straddles the clamped surface, so its interpolant is
    // only as smooth as theta^n there. Redo the last stretch so that it ends
    // on the zero, polishing the zero by Newton steps on the re-integrated
    // endpoint.
    traj.pop_last();
    numeric::DenseTrajectory<2> tail;
    for (int iter = 0; iter < 8; ++iter) {
      tail = numeric::integrate_dop853<2>(rhs, a, ya, root, ode);
      const auto end = tail.nodes().back().y;
      const double step = -end[0] / end[1];
      if (!(root + step > a)) break;
      root += step;
      if (std::abs(step) <= ro.xtol) {
        tail = numeric::integrate_dop853<2>(rhs, a, ya, root, ode);
        break;
      }
    }
    traj.extend(tail);
    xi1 = root;
  }
  return EmdenSolution(index, std::move(traj), xi0, xi1, opts.tol);
}

inline EmdenSolution integrate_emden(const PolytropicIndex& index, double tol,
                                     double xi_max = 100.0) {
  EmdenOptions opts;
  opts.tol = tol;
  opts.xi_max = xi_max;
  return integrate_emden(index, opts);
}

/// u = dlog m / dlog xi evaluated on an Emden solution; 3 at the centre.
inline double homology_u(const EmdenSolution& sol, double xi) {
  if (xi == 0.0) return 3.0;
  const auto v = sol.evaluate(xi);
  return -xi * detail::density_power(v.theta, sol.n()) / v.dtheta;
}

/// Per-index surface and core summary: one row of the constants table.
struct DerivedConstants {
  double n = 0.0;
  double xi1 = 0.0;            // +inf for n = 5
  double surface_slope = 0.0;  // (-xi^2 theta') at xi_1
  std::optional<double> omega0;  // surface value of (u v^n)^(1/(n-1)); absent for n = 1
  double rho_ratio = 0.0;      // rho_c / mean density
  double xi_core = 0.0;
  double r_core_frac = 0.0;
  double m_core_frac = 0.0;
};

inline DerivedConstants derived_constants(const EmdenSolution& sol) {
  const double n = sol.n();
  const auto& index = sol.index();
  DerivedConstants dc;
  dc.n = n;

  auto mass_fn = [&sol](double xi) {
    return xi == 0.0 ? 0.0 : -xi * xi * sol.dtheta(xi);
  };

  auto core_radius = [&](double hi) {
    const double lo = std::min(1e-3, 0.5 * hi);
    return numeric::find_root_bracketed(
        [&sol](double xi) { return homology_u(sol, xi) - 2.0; }, lo, hi,
        {.xtol = 1e-13, .ftol = 0.0, .max_iter = 200});
  };

  if (!sol.has_surface()) {
    // n = 5: the limit row. The total mass tends to sqrt(3) in units of
    // 4 pi rho_c alpha^3 while the radius diverges.
    const double inf = std::numeric_limits<double>::infinity();
    dc.xi1 = inf;
    dc.surface_slope = std::sqrt(3.0);
    dc.omega0 = 0.0;
    dc.rho_ratio = inf;
    if (homology_u(sol, sol.xi_end()) > 2.0) {
      throw NumericalError("u never reaches 2 on the supplied n = 5 solution");
    }
    dc.xi_core = core_radius(sol.xi_end());
    dc.r_core_frac = 0.0;
    dc.m_core_frac = mass_fn(dc.xi_core) / dc.surface_slope;
    return dc;
  }

  const double xi1 = *sol.xi1();
  const double slope1 = sol.dtheta(xi1);
  dc.xi1 = xi1;
  dc.surface_slope = -xi1 * xi1 * slope1;
  if (index.omega_defined()) {
    dc.omega0 = dc.surface_slope / std::pow(xi1, (n - 3.0) / (n - 1.0));
  }
  dc.rho_ratio = xi1 / (3.0 * std::abs(slope1));

  if (index.is_zero()) {
    // u = 3 everywhere: the whole star is core.
    dc.xi_core = xi1;
    dc.r_core_frac = 1.0;
    dc.m_core_frac = 1.0;
    return dc;
  }
  dc.xi_core = core_radius(xi1);
  if (!(dc.xi_core > 0.0 && dc.xi_core < xi1)) {
    throw NumericalError("u never reaches 2 inside the star");
  }
  dc.r_core_frac = dc.xi_core / xi1;
  dc.m_core_frac = mass_fn(dc.xi_core) / dc.surface_slope;
  return dc;
}

/// Large-radius asymptotics valid for 4.5 <= n < 5.
struct NearFiveAsymptotics {
  double xi1;
  double xi_core;
  double r_core_frac;
  double omega0;
  double m_core_frac_limit;  // n -> 5 value, 1/(3 sqrt 3)
};

inline NearFiveAsymptotics asymptotic_n5(const PolytropicIndex& index) {
  const double n = index.value();
  if (!(n >= 4.5 && n < 5.0)) {
    throw DomainError("near-n=5 asymptotics need 4.5 <= n < 5");
  }
  NearFiveAsymptotics a;
  a.xi1 = 3.0 * (n + 1.0) / (5.0 - n);
  a.xi_core = std::sqrt(10.0 / (3.0 * n));
  a.r_core_frac = 0.045 * (5.0 - n);
  a.omega0 = std::sqrt(3.0 / a.xi1);
  a.m_core_frac_limit = 1.0 / (3.0 * std::sqrt(3.0));
  return a;
}

/// Closed forms of the three analytic Emden functions (n = 0, 1, 5).
inline std::optional<ThetaValue> analytic_emden(const PolytropicIndex& index, double xi) {
  if (index.is_zero()) return ThetaValue{1.0 - xi * xi / 6.0, -xi / 3.0};
  if (index.is_one()) {
    if (xi < 1e-4) return detail::emden_series(1.0, xi);
    return ThetaValue{std::sin(xi) / xi,
                      (xi * std::cos(xi) - std::sin(xi)) / (xi * xi)};
  }
  if (index.is_five()) {
    const double t = 1.0 / std::sqrt(1.0 + xi * xi / 3.0);
    return ThetaValue{t, -xi * t * t * t / 3.0};
  }
  return std::nullopt;
}

}  // namespace polytrope
