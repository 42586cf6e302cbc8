#pragma once

// Homology-invariant formulation of polytropic structure.
//
// The regular solution is a single curve w_n(u) in the (u, w) plane, running
// from the centre (u = 3, w = 0) to the surface (u -> 0, w -> infinity). It
// is found here without touching the Lane-Emden solver: the first-order
// equation dw/du is integrated in the variables s = log u, y = log w, in
// which the surface divergence w ~ u^(-1/n) becomes a straight line. Density,
// mass and radius profiles are then recovered from w(z), z = 3 - u, by
// quadrature.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "polytrope/error.hpp"
#include "polytrope/index.hpp"
#include "polytrope/lane_emden.hpp"
#include "polytrope/numeric/dop853.hpp"
#include "polytrope/numeric/roots.hpp"

namespace polytrope {

/// Scale invariants at one radius.
struct HomologyState {
  double u;  // dlog m / dlog r
  double v;  // -dlog(P/rho) / dlog r
  double w;  // n v = -dlog rho / dlog r
  double z;  // 3 - u
  std::optional<double> omega;  // (u v^n)^(1/(n-1)); absent for n = 1
};

/// Invariants of an Emden solution at radius xi, 0 <= xi < xi_1.
inline HomologyState invariants_at(const EmdenSolution& sol, double xi) {
  const double n = sol.n();
  const auto& index = sol.index();
  if (xi == 0.0) {
    HomologyState h{3.0, 0.0, 0.0, 0.0, std::nullopt};
    if (index.omega_defined()) {
      // omega ~ xi^(2n/(n-1)) / 3 near the centre
      h.omega = index.is_zero() ? 1.0 / 3.0
                : n > 1.0       ? 0.0
                                : std::numeric_limits<double>::infinity();
    }
    return h;
  }
  if (sol.has_surface() && xi >= *sol.xi1()) {
    throw DomainError(
        "v diverges at the surface; use the z-parameterised curve there");
  }
  const auto t = sol.evaluate(xi);
  if (!(t.theta > 0.0)) {
    throw DomainError("theta vanishes at xi = " + std::to_string(xi));
  }
  HomologyState h;
  h.u = -xi * detail::density_power(t.theta, n) / t.dtheta;
  h.v = -xi * t.dtheta / t.theta;
  h.w = n * h.v;
  h.z = 3.0 - h.u;
  if (index.omega_defined()) {
    h.omega = std::pow(h.u * std::pow(h.v, n), 1.0 / (n - 1.0));
  }
  return h;
}

/// The same invariant through its slope form -xi^(1 + 2/(n-1)) theta'.
inline double omega_from_slope(const EmdenSolution& sol, double xi) {
  if (!sol.index().omega_defined()) {
    throw DomainError("omega undefined for n=1");
  }
  return -std::pow(xi, 1.0 + sol.index().omega_tilde()) * sol.dtheta(xi);
}

namespace detail {

// Second-order coefficient of the regular branch w = (5/3) z + b z^2 + ...
inline double tangent_curvature(double n) { return 5.0 * (5.0 - n) / (63.0 * n); }

}  // namespace detail

/// Regular solution w_n(u) of the first-order invariant equation.
///
/// Two branches: the inner one uses x = log z as independent variable (z is
/// resolved to full relative precision near the centre), the outer one uses
/// s = log u (u resolved near the surface). They meet at z = z_split.
class InvariantCurve {
 public:
  struct Sample {
    double u;
    double w;
  };

  static constexpr double z_split = 1.5;

  InvariantCurve(PolytropicIndex index, double z_start, double u_stop,
                 numeric::DenseTrajectory<1> inner, numeric::DenseTrajectory<1> outer,
                 std::optional<double> surface_constant)
      : index_(index),
        z_start_(z_start),
        u_stop_(u_stop),
        inner_(std::move(inner)),
        outer_(std::move(outer)),
        surface_constant_(surface_constant) {}

  /// n = 0: the curve collapses to the single point (u, w) = (3, 0).
  static InvariantCurve uniform_density() {
    return InvariantCurve(PolytropicIndex(0.0), 0.0, 3.0, {}, {}, std::nullopt);
  }

  const PolytropicIndex& index() const { return index_; }
  double n() const { return index_.value(); }
  double u_stop() const { return u_stop_; }
  double z_max() const { return 3.0 - u_stop_; }
  double z_start() const { return z_start_; }
  bool degenerate() const { return index_.is_zero(); }

  /// lim_{u->0} u v^n; for n != 1 this is omega_0^(n-1).
  const std::optional<double>& surface_constant() const { return surface_constant_; }

  /// Surface value of omega; absent for n = 1 or when the curve stops early.
  std::optional<double> omega0() const {
    if (index_.is_zero()) return 1.0 / 3.0;
    if (index_.is_five()) return 0.0;
    if (!index_.omega_defined() || !surface_constant_) return std::nullopt;
    return std::pow(*surface_constant_, 1.0 / (n() - 1.0));
  }

  double w_at_z(double z) const {
    if (degenerate()) {
      if (z == 0.0) return 0.0;
      throw DomainError("n = 0 has z = 0 throughout the star");
    }
    if (!(z >= 0.0 && z <= z_max())) {
      throw DomainError("z = " + std::to_string(z) + " outside the curve");
    }
    if (z <= z_split) return w_inner(z);
    return w_outer(std::log(3.0 - z));
  }

  double w_at_u(double u) const {
    if (!(u > 0.0 && u <= 3.0)) throw DomainError("u must lie in (0, 3]");
    if (degenerate()) return w_at_z(3.0 - u);
    if (u < u_stop_) throw DomainError("u below the end of the curve");
    if (u >= 3.0 - z_split) return w_inner(3.0 - u);
    return w_outer(std::log(u));
  }

  /// Inner branch, 0 <= z <= z_split.
  double w_inner(double z) const {
    if (z <= z_start_) return series_w(z);
    return std::exp(inner_.value(std::log(z))[0]);
  }

  /// Outer branch in s = log u, log(u_stop) <= s <= log(3 - z_split).
  double w_outer(double s) const { return std::exp(outer_.value(s)[0]); }

  double series_w(double z) const {
    return z * (5.0 / 3.0 + detail::tangent_curvature(n()) * z);
  }

  /// Integrator nodes, centre first.
  std::vector<Sample> samples() const {
    std::vector<Sample> out{{3.0, 0.0}};
    if (degenerate()) return out;
    for (const auto& node : inner_.nodes()) {
      out.push_back({3.0 - std::exp(node.t), std::exp(node.y[0])});
    }
    const auto& outer = outer_.nodes();
    for (std::size_t i = 1; i < outer.size(); ++i) {
      out.push_back({std::exp(outer[i].t), std::exp(outer[i].y[0])});
    }
    return out;
  }

 private:
  PolytropicIndex index_;
  double z_start_;
  double u_stop_;
  numeric::DenseTrajectory<1> inner_;
  numeric::DenseTrajectory<1> outer_;
  std::optional<double> surface_constant_;
};

struct UwPlaneOptions {
  double tol = 1e-12;
  double z_start = 1e-6;
  // Fit window for the surface constant in t = u^(1/n).
  double fit_t_lo = 1e-3;
  double fit_t_hi = 3e-2;
  int fit_degree = 4;
  int fit_points = 48;
};

namespace detail {

// Least-squares polynomial in t = u^(1/n) for C(u) = u v^n, evaluated at
// t = 0. The window is set in t because the expansion runs in powers of t.
inline double extrapolate_surface_constant(const InvariantCurve& curve,
                                           const UwPlaneOptions& opt) {
  const double n = curve.n();
  const int m = opt.fit_points;
  Eigen::MatrixXd A(m, opt.fit_degree + 1);
  Eigen::VectorXd b(m);
  const double la = std::log(opt.fit_t_lo), lb = std::log(opt.fit_t_hi);
  for (int i = 0; i < m; ++i) {
    const double t = std::exp(la + (lb - la) * i / (m - 1));
    const double s = n * std::log(t);
    const double u = std::exp(s);
    const double w = curve.w_outer(s);
    b(i) = u * std::pow(w / n, n);
    double p = 1.0;
    for (int k = 0; k <= opt.fit_degree; ++k) {
      A(i, k) = p;
      p *= t;
    }
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return c(0);
}

}  // namespace detail

/// Integrates the regular branch from z_start on the tangent line (with its
/// second-order correction) out to u_stop.
inline InvariantCurve solve_uw_plane(const PolytropicIndex& index, double u_stop,
                                     const UwPlaneOptions& opt = {}) {
  if (!(u_stop > 0.0 && u_stop < 3.0)) {
    throw DomainError("u_stop must satisfy 0 < u_stop < 3");
  }
  if (index.is_zero()) return InvariantCurve::uniform_density();

  const double n = index.value();
  const double z0 = opt.z_start;
  if (!(3.0 - u_stop > z0)) {
    throw DomainError("u_stop lies inside the series start region");
  }
  const double w0 = z0 * (5.0 / 3.0 + detail::tangent_curvature(n) * z0);
  const double z_mid = std::min(InvariantCurve::z_split, 3.0 - u_stop);

  // dlog w / dlog z
  auto inner_rhs = [n](double x, const numeric::State<1>& y) -> numeric::State<1> {
    const double z = std::exp(x);
    const double w = std::exp(y[0]);
    return {z * (2.0 - z + w / n) / ((3.0 - z) * (w - z))};
  };
  // dlog w / dlog u
  auto outer_rhs = [n](double s, const numeric::State<1>& y) -> numeric::State<1> {
    const double u = std::exp(s);
    const double w = std::exp(y[0]);
    return {(u - 1.0 + w / n) / ((3.0 - u) - w)};
  };

  numeric::OdeOptions ode;
  ode.rtol = opt.tol;
  ode.atol = opt.tol;
  numeric::DenseTrajectory<1> inner, outer;
  try {
    inner = numeric::integrate_dop853<1>(inner_rhs, std::log(z0), {std::log(w0)},
                                         std::log(z_mid), ode);
    if (3.0 - u_stop > InvariantCurve::z_split) {
      const double y_mid = inner.value(std::log(z_mid))[0];
      outer = numeric::integrate_dop853<1>(outer_rhs, std::log(3.0 - z_mid), {y_mid},
                                           std::log(u_stop), ode);
    }
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("u-w integration failed: ") + e.what());
  }

  const InvariantCurve bare(index, z0, u_stop, inner, outer, std::nullopt);
  std::optional<double> surface;
  if (index.is_five()) {
    surface = 0.0;
  } else if (std::log(u_stop) <= n * std::log(opt.fit_t_lo)) {
    surface = detail::extrapolate_surface_constant(bare, opt);
  }
  return InvariantCurve(index, z0, u_stop, std::move(inner), std::move(outer), surface);
}

/// Closed-form Picard approximation of the invariant curve in z.
inline double picard_w(const PolytropicIndex& index, double z) {
  if (!(z >= 0.0 && z <= 3.0)) throw DomainError("picard_w needs 0 <= z <= 3");
  const double n = index.value();
  const double J = (9.0 * n - 10.0) / (7.0 - n);
  if (std::abs(J) < 1e-12) return -5.0 * std::log1p(-z / 3.0);
  if (z == 3.0) return J > 0.0 ? 5.0 / J : std::numeric_limits<double>::infinity();
  return -(5.0 / J) * std::expm1(J * std::log1p(-z / 3.0));
}

/// One point of the profiles reconstructed from w(z).
struct ProfileRow {
  double z;
  double w;
  double rho;     // rho / rho_c
  double theta;   // (rho / rho_c)^(1/n)
  double m_frac;  // m / M
  double r_frac;  // r / R (0 for n = 5, where R is infinite)
  double quad_error;  // summed Gauss-Kronrod error estimate for this point
  bool converged;
};

struct QuadratureOptions {
  double tol = 1e-11;
  unsigned max_depth = 12;
  double error_limit = 1e-8;  // per-point estimate above which converged = false
};

namespace detail {

// Integrands in z of d log(rho)/dz, and of the regular parts of d log(m)/dz
// and d log(r)/dz after removing the centre behaviour 3/(2z) and 1/(2z).
// On the series branch they are written in closed form to avoid the
// cancellation between w - z and z.
struct ProfileIntegrands {
  double b;
  double z_start;

  double rho(double z, double u, double w) const {
    if (z <= z_start) return -(5.0 / 3.0 + b * z) / (u * (2.0 / 3.0 + b * z));
    return -w / (u * (w - z));
  }
  double mass(double z, double w) const {
    if (z <= z_start) return -1.5 * b / (2.0 / 3.0 + b * z);
    return 1.0 / (w - z) - 1.5 / z;
  }
  double radius(double z, double u, double w) const {
    if (z <= z_start) return (2.0 / 3.0 - 3.0 * b + b * z) / (2.0 * u * (2.0 / 3.0 + b * z));
    return 1.0 / (u * (w - z)) - 0.5 / z;
  }
};

}  // namespace detail

/// Density, enthalpy, mass and radius as functions of z by quadrature over
/// the invariant curve. The singular endpoint factors (z/3)^(3/2) and
/// (z/3)^(1/2) are applied analytically. Integrals run in z on the inner
/// branch and in s = log u on the outer one, so both ends stay regular; the
/// part of the surface tail below u_stop comes from the leading asymptotics
/// w ~ n (C/u)^(1/n).
inline std::vector<ProfileRow> quadrature_profiles(const InvariantCurve& curve,
                                                   const std::vector<double>& z_grid,
                                                   const QuadratureOptions& opt = {}) {
  using boost::math::quadrature::gauss_kronrod;
  if (curve.degenerate()) {
    throw DomainError("n = 0 has z = 0 throughout; profiles are not parameterised by z");
  }
  const double n = curve.n();
  const bool five = curve.index().is_five();
  if (curve.u_stop() > 1e-20) {
    throw DomainError("quadrature_profiles needs a curve integrated to u <= 1e-20");
  }
  if (!five && !curve.surface_constant()) {
    throw DomainError("curve carries no surface constant");
  }
  for (double z : z_grid) {
    if (!(z >= 0.0 && z < 3.0) || z > curve.z_max()) {
      throw DomainError("z = " + std::to_string(z) + " outside [0, 3) or the curve");
    }
  }

  const detail::ProfileIntegrands f{detail::tangent_curvature(n), curve.z_start()};
  constexpr double zs = InvariantCurve::z_split;

  // Integral of g(z, u, w) dz from za to zb, switching variable at z_split.
  auto path = [&](auto&& g, double za, double zb, double& err_acc) {
    auto gk = [&](auto&& h, double a, double b) {
      if (a == b) return 0.0;
      double err = 0.0;
      const double v =
          gauss_kronrod<double, 15>::integrate(h, a, b, opt.max_depth, opt.tol, &err);
      err_acc += err;
      return v;
    };
    auto in_z = [&](double z) { return g(z, 3.0 - z, curve.w_inner(z)); };
    auto in_s = [&](double s) {
      const double u = std::exp(s);
      return -u * g(3.0 - u, u, curve.w_outer(s));
    };
    const double lo = std::min(za, zb), hi = std::max(za, zb);
    double total = 0.0;
    if (lo < zs) total += gk(in_z, lo, std::min(hi, zs));
    auto s_of = [&](double z) {
      return z >= curve.z_max() ? std::log(curve.u_stop()) : std::log(3.0 - z);
    };
    if (hi > zs) total += gk(in_s, s_of(std::max(lo, zs)), s_of(hi));
    return za <= zb ? total : -total;
  };

  std::vector<std::size_t> order(z_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return z_grid[a] < z_grid[b]; });
  std::vector<ProfileRow> rows(z_grid.size());

  // Density from the centre outward.
  auto g_rho = [&](double z, double u, double w) { return f.rho(z, u, w); };
  double log_rho = 0.0, z_prev = 0.0, err_rho = 0.0;
  for (std::size_t k : order) {
    const double z = z_grid[k];
    log_rho += path(g_rho, z_prev, z, err_rho);
    z_prev = z;
    ProfileRow& row = rows[k];
    row.z = z;
    row.w = curve.w_at_z(z);
    row.rho = std::exp(log_rho);
    row.theta = std::exp(log_rho / n);
    row.quad_error = err_rho;
  }

  // Mass and radius from the surface inward. Below u_stop:
  //   int u (1/(w - z) - 3/(2z)) ds  ~ -u_stop/2
  //   int (1/(w - z) - u/(2z)) ds    ~ (u_stop/C)^(1/n) - u_stop/6
  const double u0 = curve.u_stop();
  double g_mass = 0.5 * u0;
  double g_radius = five ? 0.0 : -(std::pow(u0 / *curve.surface_constant(), 1.0 / n) - u0 / 6.0);
  auto g_m = [&](double z, double, double w) { return f.mass(z, w); };
  auto g_r = [&](double z, double u, double w) { return f.radius(z, u, w); };
  double err_mr = 0.0;
  z_prev = curve.z_max();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t k = *it;
    const double z = z_grid[k];
    g_mass += path(g_m, z_prev, z, err_mr);
    if (!five) g_radius += path(g_r, z_prev, z, err_mr);
    z_prev = z;
    ProfileRow& row = rows[k];
    if (z == 0.0) {
      row.m_frac = 0.0;
      row.r_frac = 0.0;
    } else {
      row.m_frac = std::pow(z / 3.0, 1.5) * std::exp(g_mass);
      row.r_frac = five ? 0.0 : std::sqrt(z / 3.0) * std::exp(g_radius);
    }
    row.quad_error += err_mr;
    row.converged = std::isfinite(row.quad_error) && row.quad_error <= opt.error_limit;
  }
  return rows;
}

/// Location of the core, u = 2, and the structure there.
struct CoreInfo {
  std::optional<double> xi_core;  // only when located on an Emden solution
  double z_core;
  double w_core;
  double rho_core;  // rho / rho_c
  double r_core_frac;
  double m_core_frac;
};

inline CoreInfo core_locator(const EmdenSolution& sol) {
  const auto dc = derived_constants(sol);
  CoreInfo c;
  c.xi_core = dc.xi_core;
  c.r_core_frac = dc.r_core_frac;
  c.m_core_frac = dc.m_core_frac;
  if (sol.index().is_zero()) {
    c.z_core = 0.0;
    c.w_core = 0.0;
    c.rho_core = 1.0;
    return c;
  }
  const auto h = invariants_at(sol, dc.xi_core);
  c.z_core = h.z;
  c.w_core = h.w;
  c.rho_core = detail::density_power(sol.theta(dc.xi_core), sol.n());
  return c;
}

inline CoreInfo core_locator(const InvariantCurve& curve) {
  CoreInfo c;
  if (curve.degenerate()) {
    c.z_core = 0.0;
    c.w_core = 0.0;
    c.rho_core = 1.0;
    c.r_core_frac = 1.0;
    c.m_core_frac = 1.0;
    return c;
  }
  if (curve.z_max() < 1.0) throw DomainError("curve does not reach u = 2");
  const auto row = quadrature_profiles(curve, {1.0}).front();
  c.z_core = 1.0;
  c.w_core = row.w;
  c.rho_core = row.rho;
  c.r_core_frac = row.r_frac;
  c.m_core_frac = row.m_frac;
  return c;
}

}  // namespace polytrope
