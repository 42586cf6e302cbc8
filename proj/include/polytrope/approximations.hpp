#pragma once

// Closed-form approximants to Emden functions and their error against the
// numerical solution. The evaluators are templates over the scalar type so
// that they can be evaluated off the real axis.

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polytrope/error.hpp"
#include "polytrope/index.hpp"
#include "polytrope/lane_emden.hpp"

namespace polytrope {

/// Exact rational p/q.
struct Rational {
  std::int64_t p;
  std::int64_t q;
  constexpr double value() const { return static_cast<double>(p) / static_cast<double>(q); }
};

namespace detail {

// Even-power coefficients of theta_3 through xi^10.
inline constexpr Rational kTheta3Series[] = {
    {1, 1}, {-1, 6}, {1, 40}, {-19, 5040}, {619, 1088640}, {-17117, 199584000}};

// General-n coefficients through xi^6; each is a polynomial in n with
// rational coefficients, listed constant term first.
struct NPolynomial {
  Rational c0, c1, c2;
  double at(double n) const { return c0.value() + n * (c1.value() + n * c2.value()); }
};
inline constexpr NPolynomial kGeneralSeries[] = {
    {{1, 1}, {0, 1}, {0, 1}},
    {{-1, 6}, {0, 1}, {0, 1}},
    {{0, 1}, {1, 120}, {0, 1}},
    {{0, 1}, {5, 15120}, {-8, 15120}},
};

}  // namespace detail

inline int max_taylor_order(const PolytropicIndex& index) { return index.is_three() ? 10 : 6; }

/// Coefficient of xi^(2k) in the Taylor expansion of theta_n.
inline double taylor_coefficient(const PolytropicIndex& index, int k) {
  if (k < 0 || 2 * k > max_taylor_order(index)) {
    throw DomainError("Taylor coefficient of xi^" + std::to_string(2 * k) +
                      " not available for n = " + std::to_string(index.value()));
  }
  if (index.is_three()) return detail::kTheta3Series[k].value();
  return detail::kGeneralSeries[k].at(index.value());
}

/// Truncated Taylor polynomial of theta_n of the given (even) order.
template <class T>
T taylor_theta(const PolytropicIndex& index, int order, T xi) {
  if (order < 0 || order % 2 != 0) throw DomainError("Taylor order must be even and >= 0");
  if (order > max_taylor_order(index)) {
    throw DomainError("Taylor order " + std::to_string(order) + " not available for n = " +
                      std::to_string(index.value()));
  }
  const T x = xi * xi;
  T acc = T(taylor_coefficient(index, order / 2));
  for (int k = order / 2 - 1; k >= 0; --k) acc = acc * x + T(taylor_coefficient(index, k));
  return acc;
}

/// Exponent N = 5/(3n - 5) of the Picard form; infinite at n = 5/3.
inline double picard_exponent(const PolytropicIndex& index) {
  const double d = 3.0 * index.value() - 5.0;
  if (std::abs(d) < 1e-6) return std::numeric_limits<double>::infinity();
  return 5.0 / d;
}

/// (1 + xi^2/(6N))^(-N), with the Gaussian limit at n = 5/3. On the real
/// axis the value is clamped to 0 past the zero of the base.
template <class T>
T picard_theta(const PolytropicIndex& index, T xi) {
  const T x = xi * xi;
  const double N = picard_exponent(index);
  if (std::isinf(N)) return std::exp(-x / 6.0);
  const T base = T(1.0) + x / (6.0 * N);
  if constexpr (std::is_floating_point_v<T>) {
    if (base <= 0.0) return T(0.0);
  }
  return std::pow(base, T(-N));
}

/// [2/2] rational approximant in xi^2 of theta_3.
template <class T>
T pade3_theta(T xi) {
  const T x = xi * xi;
  const T num = T(1.0) - x / 108.0 - 11.0 * x * x / 45360.0;
  const T den = T(1.0) + 17.0 * x / 108.0 + x * x / 1008.0;
  return num / den;
}

/// First zero of pade3_theta, from the numerator quadratic in xi^2.
inline double pade3_zero() {
  const double a = 11.0 / 45360.0, b = 1.0 / 108.0;
  const double x = 2.0 / (b + std::sqrt(b * b + 4.0 * a));
  return std::sqrt(x);
}

struct ApproximantKind {
  enum class Family { taylor, picard, pade3 };
  Family family;
  int order = 0;  // taylor only

  std::string name() const {
    switch (family) {
      case Family::taylor: return "taylor" + std::to_string(order);
      case Family::picard: return "picard";
      case Family::pade3: return "pade";
    }
    return {};
  }

  /// Parses "taylorK", "picard" or "pade".
  static ApproximantKind parse(const std::string& s) {
    if (s == "picard") return {Family::picard, 0};
    if (s == "pade" || s == "pade3") return {Family::pade3, 0};
    if (s.rfind("taylor", 0) == 0) {
      const std::string digits = s.substr(6);
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
        throw DomainError("bad approximant '" + s + "'");
      }
      return {Family::taylor, std::stoi(digits)};
    }
    throw DomainError("unknown approximant '" + s + "'");
  }

  /// Every approximant defined for the index, highest Taylor order only.
  static std::vector<ApproximantKind> all_for(const PolytropicIndex& index) {
    std::vector<ApproximantKind> out{{Family::taylor, max_taylor_order(index)},
                                     {Family::picard, 0}};
    if (index.is_three()) out.push_back({Family::pade3, 0});
    return out;
  }
};

inline void validate(const ApproximantKind& kind, const PolytropicIndex& index) {
  if (kind.family == ApproximantKind::Family::pade3 && !index.is_three()) {
    throw DomainError("the Pade approximant is only defined for n = 3");
  }
  if (kind.family == ApproximantKind::Family::taylor) {
    if (kind.order % 2 != 0 || kind.order > max_taylor_order(index)) {
      throw DomainError("Taylor order " + std::to_string(kind.order) +
                        " not available for n = " + std::to_string(index.value()));
    }
  }
}

inline double evaluate(const ApproximantKind& kind, const PolytropicIndex& index, double xi) {
  switch (kind.family) {
    case ApproximantKind::Family::taylor: return taylor_theta(index, kind.order, xi);
    case ApproximantKind::Family::picard: return picard_theta(index, xi);
    case ApproximantKind::Family::pade3: return pade3_theta(xi);
  }
  return std::nan("");
}

/// Relative error where the reference exceeds 0.05, absolute error below.
inline double approximation_error(double approx, double reference) {
  return reference > 0.05 ? (approx - reference) / reference : approx - reference;
}

struct ApproxReport {
  struct Column {
    ApproximantKind kind;
    std::vector<double> value;
    std::vector<double> error;
  };
  PolytropicIndex index;
  std::vector<double> xi;
  std::vector<double> theta;  // numerical, 0 past the surface
  std::vector<Column> columns;
  // Picard value above the numerical one; present when picard was requested.
  std::optional<std::vector<bool>> picard_overestimates;
};

inline ApproxReport approx_error_report(const EmdenSolution& sol,
                                        const std::vector<ApproximantKind>& kinds,
                                        const std::vector<double>& xi_grid) {
  const auto& index = sol.index();
  for (const auto& k : kinds) validate(k, index);
  ApproxReport rep{index, xi_grid, {}, {}, std::nullopt};
  rep.theta.reserve(xi_grid.size());
  for (double xi : xi_grid) {
    if (!(xi >= 0.0)) throw DomainError("xi must be non-negative");
    if (sol.has_surface() && xi >= *sol.xi1()) {
      rep.theta.push_back(0.0);
    } else if (xi > sol.xi_end()) {
      throw DomainError("xi beyond the integrated range");
    } else {
      rep.theta.push_back(sol.theta(xi));
    }
  }
  for (const auto& k : kinds) {
    ApproxReport::Column col{k, {}, {}};
    for (std::size_t i = 0; i < xi_grid.size(); ++i) {
      const double a = evaluate(k, index, xi_grid[i]);
      col.value.push_back(a);
      col.error.push_back(approximation_error(a, rep.theta[i]));
    }
    if (k.family == ApproximantKind::Family::picard) {
      std::vector<bool> over;
      for (std::size_t i = 0; i < xi_grid.size(); ++i) over.push_back(col.value[i] > rep.theta[i]);
      rep.picard_overestimates = std::move(over);
    }
    rep.columns.push_back(std::move(col));
  }
  return rep;
}

inline ApproxReport approx_error_report(const PolytropicIndex& index,
                                        const std::vector<ApproximantKind>& kinds,
                                        const std::vector<double>& xi_grid, double tol = 1e-12) {
  double hi = 0.0;
  for (double xi : xi_grid) hi = std::max(hi, xi);
  return approx_error_report(integrate_emden(index, tol, std::max(hi, 10.0) * 1.01), kinds,
                             xi_grid);
}

}  // namespace polytrope
