#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "randsec/quadrature.hpp"

using namespace randsec;

TEST(Quadrature, GaussLegendreIsExactForDegree2nMinus1) {
  const GaussRule r = gauss_legendre(6, -1.0, 2.0);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 11);
  EXPECT_NEAR(s, (std::pow(2.0, 12) - 1.0) / 12.0, 1e-11);
}

TEST(Quadrature, AdaptiveFinite) {
  const AdaptiveResult r = integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-12);
  EXPECT_NEAR(r.value, 2.0 / 3.0, 1e-11);
}

TEST(Quadrature, AdaptiveSemiInfinite) {
  const AdaptiveResult r = integrate_adaptive_semi_infinite(
      [](double x) { return std::exp(-x * x); }, 0.0, 1e-12);
  EXPECT_NEAR(r.value, 0.5 * std::sqrt(std::numbers::pi), 1e-11);
}

TEST(Quadrature, FsRuleHasUnitMass) {
  QuadratureSpec spec;
  spec.radial_nodes = 40;
  spec.angular_nodes = 16;
  EXPECT_NEAR(make_fs_quadrature(spec).total_weight(), 1.0, 1e-14);
  spec.origin = Complex(1.0, -2.0);
  spec.radial_nodes = 200;
  spec.angular_nodes = 200;
  EXPECT_NEAR(make_fs_quadrature(spec).total_weight(), 1.0, 1e-8);
}

TEST(Quadrature, FsMomentsAreExact) {
  // int |z|^(2k) (1 + |z|^2)^-p omega_FS = B(k + 1, p + 1 - k).
  QuadratureSpec spec;
  spec.radial_nodes = 30;
  spec.angular_nodes = 8;
  const Quadrature q = make_fs_quadrature(spec);
  const int p = 12;
  for (int k = 0; k <= p; ++k) {
    const double v = q.integrate([&](Complex z) {
      return std::pow(std::norm(z), k) * std::pow(1.0 + std::norm(z), -p);
    });
    const double exact = std::exp(std::lgamma(k + 1.0) + std::lgamma(p + 1.0 - k) - std::lgamma(p + 2.0));
    EXPECT_NEAR(v / exact, 1.0, 1e-12) << k;
  }
}

TEST(Quadrature, RefinedSpecDiffers) {
  QuadratureSpec spec;
  const QuadratureSpec fine = refined_spec(spec);
  EXPECT_GT(fine.radial_nodes, spec.radial_nodes);
  EXPECT_GT(fine.angular_nodes, spec.angular_nodes);
  EXPECT_NE(fine.angular_phase, spec.angular_phase);
}
