#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "randsec/polynomial.hpp"

using namespace randsec;

namespace {

// Distance between two root multisets after greedy matching.
double match_error(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (const Complex& x : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](Complex u, Complex v) {
      return std::abs(u - x) < std::abs(v - x);
    });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

CVector from_roots(const std::vector<Complex>& r) {
  CVector c = CVector::Zero(static_cast<Eigen::Index>(r.size()) + 1);
  c[0] = 1.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    for (Eigen::Index i = static_cast<Eigen::Index>(k) + 1; i > 0; --i) c[i] = c[i - 1] - r[k] * c[i];
    c[0] = -r[k] * c[0];
  }
  return c;
}

}  // namespace

TEST(Polynomial, SquareRootsOfOne) {
  CVector c(3);
  c << -1.0, 0.0, 1.0;
  EXPECT_LT(match_error(companion_roots(c), {1.0, -1.0}), 1e-14);
}

TEST(Polynomial, ConstantHasNoRoots) {
  CVector c(1);
  c << 3.0;
  EXPECT_TRUE(companion_roots(c).empty());
}

TEST(Polynomial, PureMonomialDeflates) {
  CVector c = CVector::Zero(8);
  c[7] = 2.0;
  const auto r = companion_roots(c);
  ASSERT_EQ(r.size(), 7u);
  for (const Complex& z : r) EXPECT_EQ(z, Complex(0.0, 0.0));
}

TEST(Polynomial, QuadraticFormula) {
  const Complex a(1.0, 2.0), b(-3.0, 0.5), c0(0.25, -1.0);
  CVector c(3);
  c << c0, b, a;
  const Complex disc = std::sqrt(b * b - 4.0 * a * c0);
  EXPECT_LT(match_error(companion_roots(c), {(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)}), 1e-13);
}

TEST(Polynomial, CubicFromRoots) {
  const std::vector<Complex> roots = {1.0, Complex(0.0, 2.0), -3.0};
  EXPECT_LT(match_error(companion_roots(from_roots(roots)), roots), 1e-13);
}

TEST(Polynomial, ConjugationEquivariance) {
  CVector c(6);
  c << Complex(1, 2), Complex(-0.5, 0.3), Complex(2, -1), Complex(0, 1), Complex(0.7, 0.7), Complex(-1, 0);
  std::vector<Complex> conj_roots;
  for (const Complex& z : companion_roots(c)) conj_roots.push_back(std::conj(z));
  EXPECT_LT(match_error(companion_roots(c.conjugate()), conj_roots), 1e-12);
}

TEST(Polynomial, WideDynamicRange) {
  std::vector<Complex> roots;
  for (int k = -6; k <= 6; ++k) roots.push_back(std::ldexp(1.0, 3 * k));
  const auto found = companion_roots(from_roots(roots));
  ASSERT_EQ(found.size(), roots.size());
  for (const Complex& r : roots) {
    const auto it = std::min_element(found.begin(), found.end(), [&](Complex u, Complex v) {
      return std::abs(u - r) < std::abs(v - r);
    });
    EXPECT_LT(std::abs(*it - r) / std::abs(r), 1e-8);
  }
}

TEST(Polynomial, HornerAndNewton) {
  CVector c(4);
  c << 1.0, -2.0, 0.5, 3.0;
  const Complex z(0.3, -0.4);
  const PolyValue v = horner(c, z);
  EXPECT_NEAR(std::abs(v.value - (1.0 - 2.0 * z + 0.5 * z * z + 3.0 * z * z * z)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(v.derivative - (-2.0 + z + 9.0 * z * z)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(newton_correction(c, z) - v.value / v.derivative), 0.0, 1e-14);
  const Complex far(1e5, 1e5);
  const PolyValue vf = horner(c, far);
  EXPECT_NEAR(std::abs(newton_correction(c, far) / (vf.value / vf.derivative) - 1.0), 0.0, 1e-12);
}

TEST(Polynomial, PolishImprovesPerturbedRoot) {
  const std::vector<Complex> roots = {0.5, Complex(-1.0, 1.0), 4.0};
  const CVector c = from_roots(roots);
  const Complex start = roots[1] + Complex(1e-6, -1e-6);
  const Complex polished = newton_polish(c, start);
  EXPECT_LT(std::abs(polished - roots[1]), 1e-11);
  EXPECT_LE(root_residual(c, polished), root_residual(c, start));
}

TEST(Polynomial, BalancingPreservesSpectrum) {
  CMatrix a(3, 3);
  a << 1.0, 1e6, 0.0, 1e-6, 2.0, 1e4, 0.0, 1e-4, 3.0;
  CMatrix b = a;
  const Eigen::VectorXd d = balance_matrix(b);
  const CMatrix back = d.cast<Complex>().asDiagonal() * b * d.cwiseInverse().cast<Complex>().asDiagonal();
  EXPECT_LT((back - a).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(b.cwiseAbs().maxCoeff(), a.cwiseAbs().maxCoeff());
}

TEST(Polynomial, CompanionMatrixShape) {
  CVector c(4);
  c << 6.0, -11.0, 6.0, -1.0;
  const CMatrix m = companion_matrix(c);
  ASSERT_EQ(m.rows(), 3);
  EXPECT_EQ(m(1, 0), Complex(1.0, 0.0));
  EXPECT_EQ(m(0, 2), Complex(6.0, 0.0));
}
