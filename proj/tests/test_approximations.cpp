#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "polytrope/approximations.hpp"
#include "support/oracle.hpp"

using namespace polytrope;

namespace {

// k-th even-power coefficient of f by a Cauchy integral on a circle.
template <class F>
double even_coefficient(F f, int power, double radius = 0.5, int points = 64) {
  std::complex<double> acc = 0.0;
  for (int j = 0; j < points; ++j) {
    const std::complex<double> z = std::polar(radius, 2.0 * M_PI * j / points);
    acc += f(z) / std::pow(z, power);
  }
  return acc.real() / points;
}

}  // namespace

TEST(Taylor, CoefficientsMatchRecursionOracle) {
  for (double n : {0.0, 1.0, 1.5, 3.0, 4.5}) {
    const auto ref = oracle::taylor_coefficients(n, 6);
    const PolytropicIndex index(n);
    for (int k = 0; 2 * k <= max_taylor_order(index); ++k) {
      EXPECT_NEAR(taylor_coefficient(index, k), ref[k], 1e-15 * std::max(1.0, std::abs(ref[k])))
          << "n=" << n << " k=" << k;
    }
  }
}

TEST(Taylor, OrderValidation) {
  EXPECT_THROW(taylor_theta(PolytropicIndex(2.0), 8, 1.0), DomainError);
  EXPECT_THROW(taylor_theta(PolytropicIndex(3.0), 12, 1.0), DomainError);
  EXPECT_THROW(taylor_theta(PolytropicIndex(3.0), 3, 1.0), DomainError);
  EXPECT_NO_THROW(taylor_theta(PolytropicIndex(3.0), 10, 1.0));
}

TEST(Taylor, IndexThreeOrderTenAtOne) {
  const double expected = 1.0 - 1.0 / 6 + 1.0 / 40 - 19.0 / 5040 + 619.0 / 1088640 - 17117.0 / 199584000;
  EXPECT_NEAR(taylor_theta(PolytropicIndex(3.0), 10, 1.0), expected, 1e-15);
}

TEST(Picard, ExactAtZeroAndFive) {
  for (double xi : {0.3, 1.2, 2.4}) {
    EXPECT_NEAR(picard_theta(PolytropicIndex(0.0), xi), 1.0 - xi * xi / 6.0, 1e-15);
    EXPECT_NEAR(picard_theta(PolytropicIndex(5.0), xi), 1.0 / std::sqrt(1.0 + xi * xi / 3.0), 1e-15);
  }
  EXPECT_EQ(picard_theta(PolytropicIndex(0.0), 3.0), 0.0);
}

TEST(Picard, GaussianLimit) {
  const double xi = 1.3;
  EXPECT_NEAR(picard_theta(PolytropicIndex(5.0 / 3.0), xi), std::exp(-xi * xi / 6.0), 1e-15);
  EXPECT_NEAR(picard_theta(PolytropicIndex(5.0 / 3.0 + 1e-5), xi), std::exp(-xi * xi / 6.0), 1e-6);
}

TEST(Picard, AgreesWithTaylorThroughFourthOrder) {
  for (double n : {0.5, 1.0, 2.0, 3.0, 4.0}) {
    const PolytropicIndex index(n);
    auto f = [&](std::complex<double> z) { return picard_theta(index, z); };
    EXPECT_NEAR(even_coefficient(f, 2), -1.0 / 6.0, 1e-13) << "n=" << n;
    EXPECT_NEAR(even_coefficient(f, 4), n / 120.0, 1e-13) << "n=" << n;
  }
}

TEST(Pade, MatchesSeriesThroughTenthOrder) {
  auto f = [](std::complex<double> z) { return pade3_theta(z); };
  const auto ref = oracle::taylor_coefficients(3.0, 6);
  for (int k = 0; k <= 4; ++k) EXPECT_NEAR(even_coefficient(f, 2 * k), ref[k], 1e-13) << "k=" << k;
  // The [2/2] form predicts the xi^10 term to about 1e-8.
  EXPECT_NEAR(even_coefficient(f, 10), ref[5], 1e-8);
}

TEST(Pade, FirstZero) {
  EXPECT_NEAR(pade3_zero(), 6.921, 1e-3);
  EXPECT_NEAR(pade3_theta(pade3_zero()), 0.0, 1e-14);
}

TEST(Approximants, DecreasingForNAtLeastOne) {
  for (double n : {1.0, 2.0, 3.0, 4.0}) {
    const PolytropicIndex index(n);
    double prev = 2.0;
    for (double xi = 0.05; xi < 4.0; xi += 0.05) {
      const double p = picard_theta(index, xi);
      if (p == 0.0) break;
      EXPECT_LT(p, prev) << "n=" << n << " xi=" << xi;
      prev = p;
    }
  }
  double prev = 2.0;
  for (double xi = 0.05; xi < pade3_zero(); xi += 0.05) {
    EXPECT_LT(pade3_theta(xi), prev);
    prev = pade3_theta(xi);
  }
  prev = 2.0;
  for (double xi = 0.05; xi < 2.0; xi += 0.05) {
    EXPECT_LT(taylor_theta(PolytropicIndex(3.0), 10, xi), prev);
    prev = taylor_theta(PolytropicIndex(3.0), 10, xi);
  }
}

TEST(ApproximantKind, ParseAndName) {
  EXPECT_EQ(ApproximantKind::parse("taylor10").name(), "taylor10");
  EXPECT_EQ(ApproximantKind::parse("pade3").name(), "pade");
  EXPECT_EQ(ApproximantKind::parse("picard").name(), "picard");
  EXPECT_THROW(ApproximantKind::parse("chebyshev"), DomainError);
  EXPECT_EQ(ApproximantKind::all_for(PolytropicIndex(3.0)).size(), 3u);
  EXPECT_THROW(validate(ApproximantKind::parse("pade"), PolytropicIndex(2.0)), DomainError);
}

TEST(ErrorReport, PicardIsExactForUniformDensity) {
  const auto rep = approx_error_report(PolytropicIndex(0.0), {ApproximantKind::parse("picard")},
                                       {0.0, 0.5, 1.0, 2.0, 2.4});
  for (double e : rep.columns[0].error) EXPECT_NEAR(e, 0.0, 1e-11);
}

TEST(ErrorReport, IndexThreeErrorBands) {
  const PolytropicIndex index(3.0);
  const auto rep = approx_error_report(
      index, {ApproximantKind::parse("taylor10"), ApproximantKind::parse("pade")},
      {1.0, 2.6, 3.0, 5.0, 6.5});
  const auto& taylor = rep.columns[0].error;
  const auto& pade = rep.columns[1].error;
  EXPECT_LT(std::abs(taylor[0]), 1e-4);
  for (std::size_t i = 1; i < taylor.size(); ++i) EXPECT_GT(std::abs(taylor[i]), 0.1);
  for (double e : pade) EXPECT_LT(std::abs(e), 3e-3);
}
