#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "polytrope/error.hpp"

namespace polytrope::numeric {

struct RootOptions {
  double xtol = 1e-12;  // absolute width of the final bracket
  double ftol = 0.0;    // stop early once |f| <= ftol
  int max_iter = 200;
};

/// Secant iteration kept inside a sign-changing bracket [a, b]; falls back to
/// bisection whenever the secant point leaves the bracket or the bracket
/// fails to halve over two iterations.
template <class F>
double find_root_bracketed(F&& f, double a, double b, const RootOptions& opt = {}) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw NumericalError("root is not bracketed on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "]");
  }
  double width = std::abs(b - a);
  double best = std::abs(fa) < std::abs(fb) ? a : b;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    if (std::abs(b - a) <= opt.xtol) break;
    double x = b - fb * (b - a) / (fb - fa);
    const double lo = std::min(a, b), hi = std::max(a, b);
    const bool stalled = iter % 2 == 1 && std::abs(b - a) > 0.5 * width;
    if (iter % 2 == 1) width = std::abs(b - a);
    if (!(x > lo && x < hi) || stalled) x = 0.5 * (a + b);
    const double fx = f(x);
    best = x;
    if (fx == 0.0 || std::abs(fx) <= opt.ftol) return x;
    if ((fx > 0.0) == (fa > 0.0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
  }
  best = std::abs(fa) < std::abs(fb) ? a : b;
  return best;
}

/// Plain bisection, run until the bracket stops shrinking in floating point
/// or its width reaches xtol.
template <class F>
double bisect(F&& f, double a, double b, double xtol = 0.0) {
  double fa = f(a);
  if ((fa > 0.0) == (f(b) > 0.0)) {
    throw NumericalError("bisection requires a sign change");
  }
  for (int iter = 0; iter < 2000; ++iter) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b || std::abs(b - a) <= xtol) return m;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace polytrope::numeric
