#pragma once

// Dimensional polytropic stars and the n = 3 applications: white dwarf
// limiting mass, the Eddington standard model and its luminosity, and the
// entropy structure of a radiative polytrope. SI units throughout.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polytrope/error.hpp"
#include "polytrope/index.hpp"
#include "polytrope/lane_emden.hpp"
#include "polytrope/numeric/roots.hpp"

namespace polytrope {

/// Physical constants in one coherent unit system. Defaults are CODATA 2018
/// SI values; M_sun is the IAU nominal solar mass parameter divided by G.
struct PhysicalConstants {
  double G = 6.67430e-11;          // m^3 kg^-1 s^-2
  double h = 6.62607015e-34;       // J s
  double c = 299792458.0;          // m s^-1
  double m_H = 1.66053906660e-27;  // kg (atomic mass unit)
  double a = 7.565733250e-16;      // J m^-3 K^-4
  double R_gas = 8314.462618;      // J kg^-1 K^-1 (k_B / m_H)
  double M_sun = 1.98841e30;       // kg

  void validate() const {
    for (double v : {G, h, c, m_H, a, R_gas, M_sun}) {
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("physical constants must be positive");
    }
  }
};

/// The same constants in CGS.
inline PhysicalConstants to_cgs(const PhysicalConstants& si) {
  PhysicalConstants k;
  k.G = si.G * 1e3;
  k.h = si.h * 1e7;
  k.c = si.c * 1e2;
  k.m_H = si.m_H * 1e3;
  k.a = si.a * 1e1;
  k.R_gas = si.R_gas * 1e4;
  k.M_sun = si.M_sun * 1e3;
  return k;
}

/// Parses "key = value" lines ('#' starts a comment) over the defaults.
/// Recognised keys: G, h, c, m_H, a, R_gas, M_sun.
inline PhysicalConstants parse_constants(std::istream& in, PhysicalConstants base = {}) {
  const std::map<std::string, double PhysicalConstants::*> keys{
      {"G", &PhysicalConstants::G},         {"h", &PhysicalConstants::h},
      {"c", &PhysicalConstants::c},         {"m_H", &PhysicalConstants::m_H},
      {"a", &PhysicalConstants::a},         {"R_gas", &PhysicalConstants::R_gas},
      {"M_sun", &PhysicalConstants::M_sun}};
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DomainError("constants line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const auto it = keys.find(key);
    if (it == keys.end()) throw DomainError("unknown constant '" + key + "'");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(val, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != val.size()) {
      throw DomainError("constants line " + std::to_string(lineno) + ": bad number '" + val + "'");
    }
    base.*(it->second) = v;
  }
  base.validate();
  return base;
}

inline PhysicalConstants load_constants(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("cannot open constants file '" + path + "'");
  return parse_constants(f);
}

/// Constants from the file named by POLYTROPE_CONSTANTS, or the defaults.
inline PhysicalConstants constants_from_environment() {
  const char* path = std::getenv("POLYTROPE_CONSTANTS");
  if (path == nullptr || *path == '\0') return {};
  return load_constants(path);
}

struct ProfilePoint {
  double r;
  double rho;
  double P;
  double m;
  double g;  // G m / r^2
  double H;  // enthalpy (n+1) P / rho
};

struct StellarModel {
  PolytropicIndex index;
  double K;
  double rho_c;
  double alpha;  // length scale
  double H_c;    // central enthalpy
  double P_c;
  double M;
  double R;
  EmdenSolution solution;
  PhysicalConstants constants;

  ProfilePoint at(double r) const {
    if (!(r >= 0.0 && r <= R)) throw DomainError("r outside the star");
    const double n = index.value();
    const double xi = std::min(r / alpha, *solution.xi1());
    const auto t = solution.evaluate(xi);
    const double theta = std::max(t.theta, 0.0);
    const double dens = detail::density_power(theta, n);
    ProfilePoint p;
    p.r = r;
    p.rho = rho_c * dens;
    p.P = P_c * dens * theta;
    p.m = 4.0 * std::numbers::pi * rho_c * alpha * alpha * alpha * (-xi * xi * t.dtheta);
    p.g = r > 0.0 ? constants.G * p.m / (r * r) : 0.0;
    p.H = H_c * theta;
    return p;
  }

  std::vector<ProfilePoint> profile(std::size_t count) const {
    if (count < 2) throw DomainError("profile needs at least two points");
    std::vector<ProfilePoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(at(R * static_cast<double>(i) / static_cast<double>(count - 1)));
    }
    return out;
  }
};

inline StellarModel build_model(EmdenSolution sol, double K, double rho_c,
                                const PhysicalConstants& k = {}) {
  const auto& index = sol.index();
  if (!index.has_finite_surface()) {
    throw DomainError("n = 5 has infinite radius; no dimensional model");
  }
  if (index.is_zero()) throw DomainError("n = 0 has no finite K; no dimensional model");
  if (!(K > 0.0) || !(rho_c > 0.0)) throw DomainError("K and rho_c must be positive");
  k.validate();
  const double n = index.value();
  const double pi = std::numbers::pi;
  const double alpha = std::sqrt((n + 1.0) * K * std::pow(rho_c, 1.0 / n - 1.0) / (4.0 * pi * k.G));
  const double xi1 = *sol.xi1();
  const double slope = -xi1 * xi1 * sol.dtheta(xi1);
  StellarModel m{index,
                 K,
                 rho_c,
                 alpha,
                 (n + 1.0) * K * std::pow(rho_c, 1.0 / n),
                 K * std::pow(rho_c, 1.0 + 1.0 / n),
                 4.0 * pi * rho_c * alpha * alpha * alpha * slope,
                 alpha * xi1,
                 std::move(sol),
                 k};
  return m;
}

inline StellarModel build_model(const PolytropicIndex& index, double K, double rho_c,
                                const PhysicalConstants& k = {}, double tol = 1e-12) {
  if (!index.has_finite_surface()) {
    throw DomainError("n = 5 has infinite radius; no dimensional model");
  }
  return build_model(integrate_emden(index, tol), K, rho_c, k);
}

struct DimensionlessPoint {
  double xi;
  double theta;
  double dtheta;
};

/// Recovers (xi, theta, theta') from a dimensional profile point.
inline DimensionlessPoint nondimensionalize(const StellarModel& model, const ProfilePoint& p) {
  // g = 4 pi G rho_c alpha (-theta')
  const double dtheta =
      -p.g / (4.0 * std::numbers::pi * model.constants.G * model.rho_c * model.alpha);
  return {p.r / model.alpha, p.H / model.H_c, dtheta};
}

/// Residual of M^(1-n) = 4 pi omega0^(1-n) [G/((n+1)K)]^n R^(3-n), as a
/// relative difference of logarithms.
inline double mass_radius_residual(const StellarModel& model) {
  const double n = model.index.value();
  const double slope = -std::pow(*model.solution.xi1(), 2) * model.solution.dtheta(*model.solution.xi1());
  // omega0^(n-1) = slope^(n-1) xi1^(3-n)
  const double log_w = (n - 1.0) * std::log(slope) + (3.0 - n) * std::log(*model.solution.xi1());
  const double lhs = (1.0 - n) * std::log(model.M);
  const double rhs = std::log(4.0 * std::numbers::pi) - log_w +
                     n * std::log(model.constants.G / ((n + 1.0) * model.K)) +
                     (3.0 - n) * std::log(model.R);
  return lhs - rhs;
}

/// d log R / d log M at fixed K; absent at n = 3 (M independent of R) and n = 5.
inline std::optional<double> mass_radius_exponent(const PolytropicIndex& index) {
  if (index.is_three() || index.is_five()) return std::nullopt;
  const double n = index.value();
  return (1.0 - n) / (3.0 - n);
}

namespace detail {

// Surface invariant of the n = 3 solution, integrated once per tolerance.
inline double omega0_n3(double tol) {
  static std::mutex mutex;
  static std::map<double, double> cache;
  std::lock_guard lock(mutex);
  if (const auto it = cache.find(tol); it != cache.end()) return it->second;
  const double w = *derived_constants(integrate_emden(PolytropicIndex(3.0), tol)).omega0;
  cache.emplace(tol, w);
  return w;
}

}  // namespace detail

/// Mass of an n = 3 polytrope with constant K: 4 pi omega0 (K / (pi G))^(3/2).
inline double n3_mass(double K, const PhysicalConstants& k = {}, double tol = 1e-12) {
  if (!(K > 0.0)) throw DomainError("K must be positive");
  return 4.0 * std::numbers::pi * detail::omega0_n3(tol) *
         std::pow(K / (std::numbers::pi * k.G), 1.5);
}

/// K of a relativistic degenerate electron gas.
inline double white_dwarf_K(double mu_e, const PhysicalConstants& k = {}) {
  if (!(mu_e >= 1.0)) throw DomainError("mu_e must be >= 1");
  return k.h * k.c / 8.0 * std::cbrt(3.0 / std::numbers::pi) * std::pow(k.m_H * mu_e, -4.0 / 3.0);
}

/// (3 sqrt(10) omega0 / pi^3) (h c / (G m_H^(4/3)))^(3/2).
inline double eddington_mass_constant(const PhysicalConstants& k = {}, double tol = 1e-12) {
  const double pi = std::numbers::pi;
  return 3.0 * std::sqrt(10.0) * detail::omega0_n3(tol) / (pi * pi * pi) *
         std::pow(k.h * k.c / (k.G * std::pow(k.m_H, 4.0 / 3.0)), 1.5);
}

struct ChandrasekharMass {
  double K_WD;
  double mass;         // from the n = 3 mass formula
  double closed_form;  // pi^2/(8 sqrt 15) M_star / mu_e^2
};

inline ChandrasekharMass chandrasekhar_mass(double mu_e, const PhysicalConstants& k = {},
                                            double tol = 1e-12) {
  const double K = white_dwarf_K(mu_e, k);
  const double pi = std::numbers::pi;
  const double closed = pi * pi / (8.0 * std::sqrt(15.0)) * eddington_mass_constant(k, tol) / (mu_e * mu_e);
  return {K, n3_mass(K, k, tol), closed};
}

struct EddingtonModel {
  double M;
  double mu;
  double beta;    // gas pressure fraction
  double K_M;     // P / rho^(4/3)
  double M_star;
  double L_frac;  // L / L_Edd
};

/// Root of (1 - beta)/beta^4 = (M mu^2 / M_star)^2 on (0, 1].
inline double solve_eddington_quartic(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("quartic parameter must be finite and >= 0");
  if (x == 0.0) return 1.0;
  const double x2 = x * x;
  return numeric::bisect([x2](double b) { return 1.0 - b - x2 * b * b * b * b; }, 0.0, 1.0);
}

inline EddingtonModel eddington_beta(double M, double mu, const PhysicalConstants& k = {},
                                     double tol = 1e-12) {
  if (!(M > 0.0) || !(mu > 0.0)) throw DomainError("M and mu must be positive");
  const double M_star = eddington_mass_constant(k, tol);
  const double beta = solve_eddington_quartic(M * mu * mu / M_star);
  const double K_M =
      std::cbrt(3.0 * (1.0 - beta) / k.a * std::pow(k.R_gas / (mu * beta), 4.0));
  return {M, mu, beta, K_M, M_star, 1.0 - beta};
}

struct Luminosity {
  double L_edd;
  double L;
  double L_calibrated;  // L_Edd 0.003 mu^4 beta^4 (M/M_sun)^3, informational
};

inline Luminosity luminosity(const EddingtonModel& model, double kappa_p,
                             const PhysicalConstants& k = {}) {
  if (!(kappa_p > 0.0)) throw DomainError("kappa_p must be positive");
  const double L_edd = 4.0 * std::numbers::pi * k.c * k.G * model.M / kappa_p;
  const double m = model.M / k.M_sun;
  return {L_edd, L_edd * (1.0 - model.beta),
          L_edd * 0.003 * std::pow(model.mu, 4) * std::pow(model.beta, 4) * m * m * m};
}

struct EntropyStructure {
  double pressure_ratio;  // P_rad / P_gas
  double s_rad;
  double s_gas;
  double ds_gas_dlogp;
  double nabla;  // d log T / d log P
};

inline EntropyStructure entropy_structure(const PolytropicIndex& index, double T, double rho,
                                          double mu, const PhysicalConstants& k = {}) {
  if (!(T > 0.0) || !(rho > 0.0) || !(mu > 0.0)) throw DomainError("T, rho and mu must be positive");
  const double n = index.value();
  const double rmu = k.R_gas / mu;
  const double T3 = T * T * T;
  return {T3 / rho * k.a * mu / (3.0 * k.R_gas), 4.0 * k.a * T3 / (3.0 * rho),
          rmu * std::log(std::pow(T, 2.5) / rho), rmu * (2.5 / (n + 1.0) - 1.0), 1.0 / (n + 1.0)};
}

inline constexpr double kAdiabaticGradient = 0.4;

}  // namespace polytrope
