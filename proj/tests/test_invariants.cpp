#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "polytrope/invariants.hpp"
#include "support/properties.hpp"

using namespace polytrope;

namespace {

// Surface values -xi1^(1 + 2/(n-1)) theta'(xi1) from the RK4 oracle.
struct FrozenOmega {
  double n;
  double omega0;
};
constexpr FrozenOmega kOmega0[] = {
    {1.5, 132.384299256456}, {2.0, 10.4949809357138}, {3.0, 2.01823595096623},
    {4.0, 0.729202393778436}, {4.5, 0.394356383077843},
};

}  // namespace

TEST(Invariants, CentreValues) {
  for (double n : {0.0, 0.5, 1.0, 3.0}) {
    const auto sol = integrate_emden(PolytropicIndex(n), 1e-10);
    const auto h = invariants_at(sol, 0.0);
    EXPECT_EQ(h.u, 3.0);
    EXPECT_EQ(h.v, 0.0);
    EXPECT_EQ(h.w, 0.0);
    EXPECT_EQ(h.z, 0.0);
    EXPECT_EQ(h.omega.has_value(), n != 1.0) << "n=" << n;
  }
}

TEST(Invariants, ThrowsAtSurface) {
  const auto sol = integrate_emden(PolytropicIndex(3.0), 1e-10);
  EXPECT_THROW(invariants_at(sol, *sol.xi1()), DomainError);
  EXPECT_THROW(omega_from_slope(integrate_emden(PolytropicIndex(1.0), 1e-10), 1.0), DomainError);
}

TEST(Invariants, IndexFiveClosedForm) {
  // theta = (1 + xi^2/3)^(-1/2) gives u = 3/(1 + xi^2/3) and v = (xi^2/3)/(1 + xi^2/3).
  const auto sol = integrate_emden(PolytropicIndex(5.0), 1e-12, 30.0);
  for (double xi : {0.5, 2.0, 10.0, 25.0}) {
    const double q = 1.0 + xi * xi / 3.0;
    const auto h = invariants_at(sol, xi);
    EXPECT_NEAR(h.u, 3.0 / q, 1e-10);
    EXPECT_NEAR(h.v, (q - 1.0) / q, 1e-10);
    EXPECT_NEAR(h.v + h.u / 3.0, 1.0, 1e-10);
  }
}

TEST(UwPlane, SurfaceConstantMatchesOracle) {
  for (const auto& f : kOmega0) {
    const auto curve = solve_uw_plane(PolytropicIndex(f.n), 1e-30);
    ASSERT_TRUE(curve.omega0().has_value());
    EXPECT_NEAR(*curve.omega0() / f.omega0, 1.0, 1e-6) << "n=" << f.n;
  }
}

TEST(UwPlane, IndexOneSurfaceConstantIsPiSquared) {
  const auto curve = solve_uw_plane(PolytropicIndex(1.0), 1e-30);
  EXPECT_NEAR(*curve.surface_constant() / (std::numbers::pi * std::numbers::pi), 1.0, 1e-6);
  EXPECT_FALSE(curve.omega0().has_value());
}

TEST(UwPlane, RegularCurveMatchesDirectIntegration) {
  for (double n : {1.0, 1.5, 3.0, 4.5}) {
    const PolytropicIndex index(n);
    const auto sol = integrate_emden(index, 1e-12);
    const auto curve = solve_uw_plane(index, 1e-30);
    double worst = 0.0;
    for (double xi : props::interior_samples(sol, 200, 0.02, 0.98)) {
      const auto h = invariants_at(sol, xi);
      if (h.u < 0.1 || h.u > 2.9) continue;
      worst = std::max(worst, std::abs(curve.w_at_u(h.u) - h.w));
    }
    EXPECT_LT(worst, 1e-6) << "n=" << n;
  }
}

TEST(UwPlane, StartsOnTangentLine) {
  const auto curve = solve_uw_plane(PolytropicIndex(3.0), 1e-30);
  for (double z : {1e-7, 1e-5, 1e-3}) {
    EXPECT_NEAR(curve.w_at_z(z) / z, 5.0 / 3.0, 0.2 * z);
  }
}

TEST(UwPlane, UniformDensityIsDegenerate) {
  const auto curve = solve_uw_plane(PolytropicIndex(0.0), 1e-30);
  EXPECT_TRUE(curve.degenerate());
  EXPECT_EQ(*curve.omega0(), 1.0 / 3.0);
  EXPECT_THROW(quadrature_profiles(curve, {0.5}), DomainError);
  EXPECT_THROW(solve_uw_plane(PolytropicIndex(3.0), 3.5), DomainError);
}

TEST(Quadrature, ProfilesMatchDirectIntegration) {
  for (double n : {1.0, 1.5, 2.0, 3.0, 4.0}) {
    const PolytropicIndex index(n);
    const auto sol = integrate_emden(index, 1e-12);
    const auto curve = solve_uw_plane(index, 1e-30);
    const double xi1 = *sol.xi1();
    const double mass = -xi1 * xi1 * sol.dtheta(xi1);
    std::vector<double> xs, zs;
    for (int i = 1; i <= 45; ++i) {
      xs.push_back(0.02 * i * xi1);
      zs.push_back(invariants_at(sol, xs.back()).z);
    }
    const auto rows = quadrature_profiles(curve, zs);
    double d_rho = 0.0, d_m = 0.0, d_r = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double xi = xs[i];
      d_rho = std::max(d_rho, std::abs(rows[i].rho - detail::density_power(sol.theta(xi), n)));
      d_m = std::max(d_m, std::abs(rows[i].m_frac + xi * xi * sol.dtheta(xi) / mass));
      d_r = std::max(d_r, std::abs(rows[i].r_frac - xi / xi1));
      EXPECT_TRUE(rows[i].converged);
    }
    EXPECT_LT(d_rho, 1e-8) << "n=" << n;
    EXPECT_LT(d_m, 1e-8) << "n=" << n;
    EXPECT_LT(d_r, 1e-8) << "n=" << n;
  }
}

TEST(Quadrature, CentralDensityFollowsTangentLine) {
  // Along w = 5z/3 the density integral is exactly (1 - z/3)^(5/2); the
  // curvature of the true curve enters at order z^2.
  const auto curve = solve_uw_plane(PolytropicIndex(3.0), 1e-30);
  const auto rows = quadrature_profiles(curve, {1e-4, 1e-3});
  for (const auto& r : rows) {
    EXPECT_NEAR(r.rho, std::pow(1.0 - r.z / 3.0, 2.5), 2.0 * r.z * r.z);
  }
}

TEST(Quadrature, CoreFromCurveMatchesCoreFromSolution) {
  for (double n : {1.5, 3.0, 4.0}) {
    const PolytropicIndex index(n);
    const auto a = core_locator(integrate_emden(index, 1e-12));
    const auto b = core_locator(solve_uw_plane(index, 1e-30));
    EXPECT_NEAR(a.r_core_frac, b.r_core_frac, 1e-8) << "n=" << n;
    EXPECT_NEAR(a.m_core_frac, b.m_core_frac, 1e-8) << "n=" << n;
    EXPECT_NEAR(a.rho_core, b.rho_core, 1e-8) << "n=" << n;
  }
}

TEST(Picard, TangentSlopeAndZeroCurvatureCase) {
  for (double n : {0.5, 2.0, 3.0, 4.5}) {
    const PolytropicIndex index(n);
    EXPECT_NEAR(picard_w(index, 1e-6) / 1e-6, 5.0 / 3.0, 1e-5);
  }
  // 9n = 10 makes the exponent vanish and the form logarithmic.
  EXPECT_NEAR(picard_w(PolytropicIndex(10.0 / 9.0), 1.5), -5.0 * std::log(0.5), 1e-12);
  EXPECT_THROW(picard_w(PolytropicIndex(3.0), 3.5), DomainError);
}

TEST(Picard, NotExactAtIndexFive) {
  // The n = 5 curve is the tangent line w = 5z/3, but J = 35/2 bends the
  // Picard form over almost at once.
  const PolytropicIndex index(5.0);
  const auto curve = solve_uw_plane(index, 1e-30);
  EXPECT_NEAR(curve.w_at_z(1.5), 2.5, 1e-9);
  EXPECT_NEAR(picard_w(index, 1.5), (2.0 / 7.0) * (1.0 - std::pow(0.5, 17.5)), 1e-14);
  EXPECT_NEAR(picard_w(index, 1e-4) / 1e-4, 5.0 / 3.0, 1e-3);
}
