#pragma once

// Dormand-Prince 8(5,3) explicit Runge-Kutta integrator with continuous
// (dense) output. Coefficients follow Hairer & Wanner's DOP853, with the
// sixth-order interpolant that reuses the first-same-as-last stage instead
// of three extra function evaluations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "polytrope/error.hpp"

namespace polytrope::numeric {

template <std::size_t N>
using State = std::array<double, N>;

/// One accepted step [t0, t1] together with its interpolation polynomial.
template <std::size_t N>
struct DenseSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  std::array<State<N>, 8> rc{};

  State<N> value(double t) const {
    const double s = (t - t0) / (t1 - t0);
    const double s1 = 1.0 - s;
    State<N> y;
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = rc[0][i] +
             s * (rc[1][i] +
                  s1 * (rc[2][i] +
                        s * (rc[3][i] +
                             s1 * (rc[4][i] +
                                   s * (rc[5][i] +
                                        s1 * (rc[6][i] + s * rc[7][i]))))));
    }
    return y;
  }

  /// Time derivative of the interpolant.
  State<N> derivative(double t) const {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    State<N> dy;
    for (std::size_t i = 0; i < N; ++i) {
      double q = rc[6][i] + s * rc[7][i];
      double dq = rc[7][i];
      double q_next = rc[5][i] + s1 * q;
      dq = -q + s1 * dq;
      q = q_next;
      q_next = rc[4][i] + s * q;
      dq = q + s * dq;
      q = q_next;
      q_next = rc[3][i] + s1 * q;
      dq = -q + s1 * dq;
      q = q_next;
      q_next = rc[2][i] + s * q;
      dq = q + s * dq;
      q = q_next;
      q_next = rc[1][i] + s1 * q;
      dq = -q + s1 * dq;
      q = q_next;
      dq = q + s * dq;
      dy[i] = dq / h;
    }
    return dy;
  }
};

/// Piecewise dense output over a contiguous sequence of accepted steps.
/// Steps may run toward decreasing t; lookups handle either direction.
template <std::size_t N>
class DenseTrajectory {
 public:
  struct Node {
    double t;
    State<N> y;
  };

  DenseTrajectory() = default;

  void start(double t0, const State<N>& y0) {
    nodes_.clear();
    segments_.clear();
    nodes_.push_back({t0, y0});
  }

  void append(const DenseSegment<N>& seg, const State<N>& y1) {
    segments_.push_back(seg);
    nodes_.push_back({seg.t1, y1});
  }

  /// Shortens the last segment so that the trajectory ends at t (which must
  /// lie inside that segment). The interpolant itself is unchanged.
  void truncate_last(double t) {
    if (segments_.empty()) return;
    nodes_.back() = {t, segments_.back().value(t)};
  }

  void pop_last() {
    if (segments_.empty()) return;
    segments_.pop_back();
    nodes_.pop_back();
  }

  /// Appends a trajectory that starts where this one ends.
  void extend(const DenseTrajectory& tail) {
    for (std::size_t i = 0; i < tail.segments_.size(); ++i) {
      append(tail.segments_[i], tail.nodes_[i + 1].y);
    }
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t size() const { return segments_.size(); }
  bool empty() const { return segments_.empty(); }

  double t_begin() const { return nodes_.front().t; }
  double t_end() const { return nodes_.back().t; }
  bool forward() const { return t_end() >= t_begin(); }

  bool covers(double t) const {
    const double lo = std::min(t_begin(), t_end());
    const double hi = std::max(t_begin(), t_end());
    return t >= lo && t <= hi;
  }

  State<N> value(double t) const { return locate(t).value(t); }
  State<N> derivative(double t) const { return locate(t).derivative(t); }

 private:
  const DenseSegment<N>& locate(double t) const {
    if (segments_.empty()) throw NumericalError("dense output is empty");
    if (!covers(t)) {
      throw DomainError("dense output requested at t = " + std::to_string(t) +
                        " outside the integrated range");
    }
    // Index of the first node strictly beyond t in the direction of travel.
    std::size_t idx;
    if (forward()) {
      auto it = std::upper_bound(
          nodes_.begin(), nodes_.end(), t,
          [](double v, const Node& node) { return v < node.t; });
      idx = static_cast<std::size_t>(it - nodes_.begin());
    } else {
      auto it = std::upper_bound(
          nodes_.begin(), nodes_.end(), t,
          [](double v, const Node& node) { return v > node.t; });
      idx = static_cast<std::size_t>(it - nodes_.begin());
    }
    idx = std::clamp<std::size_t>(idx, 1, segments_.size());
    return segments_[idx - 1];
  }

  std::vector<Node> nodes_;
  std::vector<DenseSegment<N>> segments_;
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0 selects the step automatically
  double max_step = 0.0;      // 0 means unbounded
  double max_step_rel = 0.0;  // if > 0, also cap h at max_step_rel * max(1, |t|)
  std::size_t max_steps = 1000000;
};

namespace detail {

template <std::size_t N>
double rms_norm(const State<N>& v, const State<N>& scale) {
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double r = v[i] / scale[i];
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(N));
}

}  // namespace detail

/// Integrates dy/dt = f(t, y) from t0 toward t_end. After every accepted step
/// `stop(t, y)` is consulted; returning true ends the integration there
/// (the final segment is kept so the caller can root-find inside it).
///
/// Throws NumericalError on step-size underflow or when max_steps is hit.
template <std::size_t N, class Rhs, class Stop>
DenseTrajectory<N> integrate_dop853(Rhs&& f, double t0, const State<N>& y0,
                                    double t_end, const OdeOptions& opt,
                                    Stop&& stop) {
  constexpr double c2 = 0.05260015195876773187856, c3 = 0.07890022793815159781784,
                   c4 = 0.11835034190722739672676, c5 = 0.28164965809277260327324,
                   c6 = 0.33333333333333333333333, c7 = 0.25000000000000000000000,
                   c8 = 0.30769230769230769230769, c9 = 0.65128205128205128205128,
                   c10 = 0.60000000000000000000000, c11 = 0.85714285714285714285714;
  constexpr double b1 = 0.05429373411656876223805, b6 = 4.45031289275240888144114,
                   b7 = 1.89151789931450038304282, b8 = -5.80120396001058478146721,
                   b9 = 0.31116436695781989440892, b10 = -0.15216094966251607855618,
                   b11 = 0.20136540080403034837478, b12 = 0.04471061572777259051769;
  constexpr double bhh1 = 0.24409448818897637795276, bhh2 = 0.73384668828161185734136,
                   bhh3 = 0.02205882352941176470588;
  constexpr double er1 = 0.01312004499419488073250, er6 = -1.22515644637620444072057,
                   er7 = -0.49575894965725019152141, er8 = 1.66437718245498653696153,
                   er9 = -0.35032884874997368168865, er10 = 0.33417911871301747902973,
                   er11 = 0.08192320648511571246571, er12 = -0.02235530786388629525884;
  constexpr double a21 = 0.05260015195876773187856, a31 = 0.01972505698453789945446,
                   a32 = 0.05917517095361369836338, a41 = 0.02958758547680684918169,
                   a43 = 0.08876275643042054754507, a51 = 0.24136513415926668550237,
                   a53 = -0.88454947932828608534486, a54 = 0.92483400326179200311574,
                   a61 = 0.03703703703703703703704, a64 = 0.17082860872947387127960,
                   a65 = 0.12546768756682242501669, a71 = 0.03710937500000000000000,
                   a74 = 0.17025221101954403931498, a75 = 0.06021653898045596068502,
                   a76 = -0.01757812500000000000000, a81 = 0.03709200011850479271088,
                   a84 = 0.17038392571223999381021, a85 = 0.10726203044637328465181,
                   a86 = -0.01531943774862440175279, a87 = 0.00827378916381402288758,
                   a91 = 0.62411095871607571711443, a94 = -3.36089262944694129406857,
                   a95 = -0.86821934684172600681819, a96 = 27.5920996994467083049416,
                   a97 = 20.1540675504778934086187, a98 = -43.4898841810699588477366,
                   a101 = 0.47766253643826436589043, a104 = -2.48811461997166764192642,
                   a105 = -0.59029082683684299637145, a106 = 21.2300514481811942347289,
                   a107 = 15.2792336328824235832597, a108 = -33.2882109689848629194453,
                   a109 = -0.02033120170850862613582, a111 = -0.93714243008598732571704,
                   a114 = 5.18637242884406370830024, a115 = 1.09143734899672957818500,
                   a116 = -8.14978701074692612513997, a117 = -18.5200656599969598641566,
                   a118 = 22.7394870993505042818970, a119 = 2.49360555267965238987089,
                   a1110 = -3.04676447189821950038237, a121 = 2.27331014751653820792360,
                   a124 = -10.5344954667372501984067, a125 = -2.00087205822486249909676,
                   a126 = -17.9589318631187989172766, a127 = 27.9488845294199600508500,
                   a128 = -2.85899827713502369474066, a129 = -8.87285693353062954433549,
                   a1210 = 12.3605671757943030647266, a1211 = 0.64339274601576353035597;
  constexpr double d41 = -5.40685903845352664250302, d46 = 367.268892700041893590281,
                   d47 = 154.609958204083905482676, d48 = -505.920283865412564024766,
                   d49 = 15.5975154819608130688200, d410 = -26.1936204184402805956691,
                   d411 = -0.74003512364122230844721, d412 = 1.11776539319431476294221,
                   d413 = -0.33333333333333333333333;
  constexpr double d51 = 6.51987095363079615048119, d56 = -1066.34956011730205278592,
                   d57 = -351.864047514639508625601, d58 = 1363.51955696662884408368,
                   d59 = -112.727669432657582669864, d510 = 159.796191868560289612921,
                   d511 = -2.13865100308788816220259, d512 = -3.75569172113289760348584,
                   d513 = 7.00000000000000000000000;
  constexpr double d61 = 10.4698004763293477204238, d66 = -1380.01473607038123167155,
                   d67 = -531.219827862514074379012, d68 = 1866.98964341870892451324,
                   d69 = -53.3302605020547902574560, d610 = 82.4147560258671369782481,
                   d611 = 7.38443654502992069572676, d612 = 0.41729908012587751149843,
                   d613 = -3.11111111111111111111111;
  constexpr double d71 = -16.6338582677165354330709, d76 = 4516.16568914956011730205,
                   d77 = 1393.85185384057776465219, d78 = -5687.52042419481539670071,
                   d79 = 473.965563750151263163661, d710 = -661.810776942355889724311,
                   d711 = -18.0180473354013232598119;
  constexpr double safe = 0.9, fac1 = 0.333, fac2 = 6.0;

  const double dir = t_end >= t0 ? 1.0 : -1.0;
  const double span = std::abs(t_end - t0);

  DenseTrajectory<N> traj;
  traj.start(t0, y0);
  if (span == 0.0) return traj;

  double t = t0;
  State<N> y = y0;
  State<N> k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12, k13, tmp, ynew;

  auto stage = [&](double tt, const State<N>& yy, State<N>& out) {
    out = f(tt, yy);
  };
  auto scale_of = [&](const State<N>& a, const State<N>& b) {
    State<N> sc;
    for (std::size_t i = 0; i < N; ++i)
      sc[i] = opt.atol + opt.rtol * std::max(std::abs(a[i]), std::abs(b[i]));
    return sc;
  };

  stage(t, y, k1);

  double h = opt.initial_step;
  if (h <= 0.0) {
    // Hairer's starting-step heuristic.
    const State<N> sc = scale_of(y, y);
    const double d0 = detail::rms_norm(y, sc);
    const double d1 = detail::rms_norm(k1, sc);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + dir * h0 * k1[i];
    stage(t + dir * h0, tmp, k2);
    State<N> diff;
    for (std::size_t i = 0; i < N; ++i) diff[i] = k2[i] - k1[i];
    const double d2 = detail::rms_norm(diff, sc) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                    : std::pow(0.01 / dmax, 1.0 / 8.0);
    h = std::min(100.0 * h0, h1);
  }
  auto step_cap = [&opt](double tt) {
    double cap = opt.max_step > 0.0 ? opt.max_step : 1e300;
    if (opt.max_step_rel > 0.0)
      cap = std::min(cap, opt.max_step_rel * std::max(1.0, std::abs(tt)));
    return cap;
  };
  h = std::min({h, step_cap(t), span});

  std::size_t steps = 0;
  bool last = false;
  while (true) {
    if (++steps > opt.max_steps) {
      throw NumericalError("ODE integration exceeded " +
                           std::to_string(opt.max_steps) + " steps at t = " +
                           std::to_string(t));
    }
    if (h <= std::abs(t) * 1e-15 || !std::isfinite(h) || h < 1e-300) {
      throw NumericalError("ODE step size underflow at t = " + std::to_string(t));
    }
    const double remaining = std::abs(t_end - t);
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    const double hs = dir * h;

    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
    stage(t + c2 * hs, tmp, k2);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    stage(t + c3 * hs, tmp, k3);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a41 * k1[i] + a43 * k3[i]);
    stage(t + c4 * hs, tmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a51 * k1[i] + a53 * k3[i] + a54 * k4[i]);
    stage(t + c5 * hs, tmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a61 * k1[i] + a64 * k4[i] + a65 * k5[i]);
    stage(t + c6 * hs, tmp, k6);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a71 * k1[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    stage(t + c7 * hs, tmp, k7);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a81 * k1[i] + a84 * k4[i] + a85 * k5[i] + a86 * k6[i] +
                            a87 * k7[i]);
    stage(t + c8 * hs, tmp, k8);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a91 * k1[i] + a94 * k4[i] + a95 * k5[i] + a96 * k6[i] +
                            a97 * k7[i] + a98 * k8[i]);
    stage(t + c9 * hs, tmp, k9);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a101 * k1[i] + a104 * k4[i] + a105 * k5[i] +
                            a106 * k6[i] + a107 * k7[i] + a108 * k8[i] + a109 * k9[i]);
    stage(t + c10 * hs, tmp, k10);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a111 * k1[i] + a114 * k4[i] + a115 * k5[i] +
                            a116 * k6[i] + a117 * k7[i] + a118 * k8[i] +
                            a119 * k9[i] + a1110 * k10[i]);
    stage(t + c11 * hs, tmp, k11);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a121 * k1[i] + a124 * k4[i] + a125 * k5[i] +
                            a126 * k6[i] + a127 * k7[i] + a128 * k8[i] +
                            a129 * k9[i] + a1210 * k10[i] + a1211 * k11[i]);
    stage(t + hs, tmp, k12);

    State<N> incr;
    for (std::size_t i = 0; i < N; ++i) {
      incr[i] = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] +
                b10 * k10[i] + b11 * k11[i] + b12 * k12[i];
      ynew[i] = y[i] + hs * incr[i];
    }

    const State<N> sc = scale_of(y, ynew);
    double err = 0.0, err2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      double e = (incr[i] - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k12[i]) / sc[i];
      err2 += e * e;
      e = (er1 * k1[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] + er9 * k9[i] +
           er10 * k10[i] + er11 * k11[i] + er12 * k12[i]) /
          sc[i];
      err += e * e;
    }
    double deno = err + 0.01 * err2;
    if (deno <= 0.0) deno = 1.0;
    err = h * err / std::sqrt(deno * static_cast<double>(N));
    if (!std::isfinite(err)) err = 1e10;

    double fac = std::pow(err, 1.0 / 8.0);
    fac = std::max(1.0 / fac2, std::min(1.0 / fac1, fac / safe));

    if (err <= 1.0) {
      const double tnew = last ? t_end : t + hs;
      stage(tnew, ynew, k13);
      DenseSegment<N> seg;
      seg.t0 = t;
      seg.t1 = tnew;
      for (std::size_t i = 0; i < N; ++i) {
        const double ydiff = ynew[i] - y[i];
        const double bspl = hs * k1[i] - ydiff;
        seg.rc[0][i] = y[i];
        seg.rc[1][i] = ydiff;
        seg.rc[2][i] = bspl;
        seg.rc[3][i] = ydiff - hs * k13[i] - bspl;
        seg.rc[4][i] = hs * (d41 * k1[i] + d46 * k6[i] + d47 * k7[i] + d48 * k8[i] +
                             d49 * k9[i] + d410 * k10[i] + d411 * k11[i] +
                             d412 * k12[i] + d413 * k13[i]);
        seg.rc[5][i] = hs * (d51 * k1[i] + d56 * k6[i] + d57 * k7[i] + d58 * k8[i] +
                             d59 * k9[i] + d510 * k10[i] + d511 * k11[i] +
                             d512 * k12[i] + d513 * k13[i]);
        seg.rc[6][i] = hs * (d61 * k1[i] + d66 * k6[i] + d67 * k7[i] + d68 * k8[i] +
                             d69 * k9[i] + d610 * k10[i] + d611 * k11[i] +
                             d612 * k12[i] + d613 * k13[i]);
        seg.rc[7][i] = hs * (d71 * k1[i] + d76 * k6[i] + d77 * k7[i] + d78 * k8[i] +
                             d79 * k9[i] + d710 * k10[i] + d711 * k11[i]);
      }
      traj.append(seg, ynew);
      t = tnew;
      y = ynew;
      k1 = k13;
      if (last || stop(t, y)) break;
      h = std::min(h / fac, step_cap(t));
    } else {
      h /= std::min(1.0 / fac1, fac / safe);
      last = false;
    }
  }
  return traj;
}

template <std::size_t N, class Rhs>
DenseTrajectory<N> integrate_dop853(Rhs&& f, double t0, const State<N>& y0,
                                    double t_end, const OdeOptions& opt) {
  return integrate_dop853<N>(std::forward<Rhs>(f), t0, y0, t_end, opt,
                             [](double, const State<N>&) { return false; });
}

}  // namespace polytrope::numeric
