#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "randsec/error.hpp"
#include "randsec/polynomial.hpp"
#include "randsec/zeros.hpp"

using namespace randsec;

namespace {

BergmanBasis basis_for(const Weight& w, int p) {
  return build_basis(WeightSequence(w), p, make_fs_quadrature(default_quadrature_spec(p, w)));
}

Quadrature potential_rule(int radial = 64, int angular = 128) {
  QuadratureSpec spec;
  spec.radial_nodes = radial;
  spec.angular_nodes = angular;
  return make_fs_quadrature(spec);
}

}  // namespace

TEST(Zeros, DegreeDropGoesToInfinity) {
  CVector c(4);
  c << -1.0, 0.0, 1.0, 0.0;
  const ZeroSet z = find_zeros(section_from_monomials(3, c));
  EXPECT_EQ(z.p, 3);
  EXPECT_EQ(z.multiplicity_at_infinity, 1);
  ASSERT_EQ(z.finite_zeros.size(), 2u);
  EXPECT_NEAR(std::abs(z.finite_zeros[0] * z.finite_zeros[1] + 1.0), 0.0, 1e-14);
  EXPECT_LT(z.max_residual, 1e-14);
}

TEST(Zeros, ZeroPolynomialIsDegenerate) {
  EXPECT_THROW(find_zeros(section_from_monomials(4, CVector::Zero(5))), DegenerateSample);
}

TEST(Zeros, ConstantSectionHasAllZerosAtInfinity) {
  CVector c = CVector::Zero(6);
  c[0] = 2.0;
  const ZeroSet z = find_zeros(section_from_monomials(5, c));
  EXPECT_TRUE(z.finite_zeros.empty());
  EXPECT_EQ(z.multiplicity_at_infinity, 5);
}

TEST(Zeros, ShiftedOrigin) {
  CVector c(3);
  c << -4.0, 0.0, 1.0;
  const ZeroSet z = find_zeros(section_from_monomials(2, c, Complex(1.0, 1.0)));
  ASSERT_EQ(z.finite_zeros.size(), 2u);
  for (const Complex& r : z.finite_zeros) EXPECT_NEAR(std::abs(r - Complex(1.0, 1.0)), 2.0, 1e-13);
}

TEST(Zeros, SectionFromBasisVanishesAtRoots) {
  const BergmanBasis b = basis_for(Weight::translated_fs(Complex(0.5, -1.0)), 30);
  Rng rng = make_rng(11);
  const RandomSection s = assemble_section(b, sample(Ensemble::gaussian(), b.dimension(), rng));
  const ZeroSet z = find_zeros(s);
  EXPECT_EQ(static_cast<int>(z.finite_zeros.size()) + z.multiplicity_at_infinity, 30);
  EXPECT_LT(z.max_residual, 1e-12);
  const CVector mono = s.monomial_coeffs();
  EXPECT_EQ(mono.size(), 31);
  EXPECT_NEAR(s.log_abs(Complex(0.3, 0.3)),
              std::log(std::abs(horner(mono, Complex(0.3, 0.3) - s.origin).value)), 1e-10);
}

TEST(Zeros, CsvFormat) {
  CVector c(3);
  c << -1.0, 1.0, 0.0;
  const ZeroSet z = find_zeros(section_from_monomials(2, c));
  const auto file = std::filesystem::temp_directory_path() / "randsec_zeros.csv";
  write_zero_csv(z, file);
  std::ifstream is(file);
  std::string header, row, last;
  std::getline(is, header);
  std::getline(is, row);
  std::getline(is, last);
  EXPECT_EQ(header, "re,im");
  EXPECT_EQ(row.substr(0, 2), "1,");
  EXPECT_EQ(last, "inf,1");
}

TEST(Zeros, RadialCdfExactOracles) {
  const Weight fs = Weight::fubini_study();
  // One zero at radius 1 against r^2 / (1 + r^2): sup is 1/2.
  CVector c(2);
  c << -1.0, 1.0;
  EXPECT_NEAR(radial_cdf_distance(find_zeros(section_from_monomials(1, c)), fs).distance, 0.5, 1e-14);
  // All zeros at the origin: the jump at r = 0 has size 1.
  CVector m = CVector::Zero(5);
  m[4] = 1.0;
  const Weight level = effective_weight(WeightSequence(fs), 4);
  EXPECT_NEAR(radial_cdf_distance(find_zeros(section_from_monomials(4, m)), level).distance, 1.0, 1e-14);
  // All zeros at infinity.
  CVector k = CVector::Zero(5);
  k[0] = 1.0;
  const RadialCdfResult r = radial_cdf_distance(find_zeros(section_from_monomials(4, k)), level);
  EXPECT_NEAR(r.distance, 1.0, 1e-14);
  EXPECT_NEAR(r.inf_bucket, 1.0, 1e-14);
  EXPECT_THROW(radial_cdf_distance(find_zeros(section_from_monomials(4, k)), custom_weight("two_center")),
               UnsupportedOperation);
}

TEST(Zeros, PotentialL1ConstantSectionOracle) {
  // For s_0 = sqrt(p + 1) on the FS weight, u = (1/2) log(1 + |z|^2) is
  // exponential with rate 2 under omega_FS, so the distance is
  // c - 1/2 + exp(-2c) with c = log(p + 1) / (2p).
  const double expected[] = {0.406688205836690763, 0.463694118642498672};
  const int ps[] = {10, 50};
  for (int i = 0; i < 2; ++i) {
    const BergmanBasis b = basis_for(Weight::fubini_study(), ps[i]);
    CVector a = CVector::Zero(b.dimension());
    a[0] = 1.0;
    const RandomSection s = assemble_section(b, a);
    EXPECT_NEAR(potential_l1_distance(s, b.weight(), potential_rule(1000, 8)), expected[i], 1e-6);
  }
}

TEST(Zeros, AngularKsOfRootsOfUnity) {
  const int p = 12;
  CVector c = CVector::Zero(p + 1);
  c[0] = -1.0;
  c[p] = 1.0;
  const ZeroSet z = find_zeros(section_from_monomials(p, c));
  const AngularKs ks = angular_ks_statistic(z, Complex(0.0, 0.0));
  EXPECT_FALSE(ks.no_finite_zeros);
  EXPECT_LE(ks.statistic, 1.0 / p + 1e-12);
  const ZeroSet sets[] = {z, z};
  EXPECT_LE(angular_ks_pooled(sets, Complex(0.0, 0.0)).statistic, 1.0 / p + 1e-12);
}

TEST(Zeros, ExpectationPotentialOracle) {
  // a = e_0 on FS gives (1/p) log(|s_0|_h / sqrt(P)) = -(1/2) log(1 + |z|^2),
  // whose L1 norm is 1/2.
  const BergmanBasis b = basis_for(Weight::fubini_study(), 20);
  CVector a = CVector::Zero(b.dimension());
  a[0] = 1.0;
  const CVector samples[] = {a};
  const ExpectationPotential e = expectation_potential(b, samples, potential_rule(400, 8));
  EXPECT_NEAR(e.l1_norm, 0.5, 1e-6);
  EXPECT_EQ(e.trials, 1);
}

TEST(Zeros, ExpectationPotentialGaussianIsConstant) {
  // For a unitarily invariant ensemble the integrand is log|<a, u>| / A_p in
  // law; its mean is -gamma_E / (2 p) for Gaussian coefficients.
  const int p = 10;
  const BergmanBasis b = basis_for(Weight::fubini_study(), p);
  Rng rng = make_rng(12);
  const ExpectationPotential e =
      expectation_potential(b, Ensemble::gaussian(), 20000, potential_rule(16, 16), rng);
  const double expected = -std::numbers::egamma / (2.0 * p);
  EXPECT_NEAR(e.l1_norm, std::abs(expected), 0.05 * std::abs(expected));
}

TEST(Zeros, ExpectationPotentialSphereUsesHarmonicNumber) {
  // Sphere coefficients: E log|<a, u>| = -(1/2) H_(d - 1), so the L1 norm is
  // H_(d - 1) / (2p), far from the Gaussian value gamma_E / (2p).
  const int p = 10;
  const BergmanBasis b = basis_for(Weight::fubini_study(), p);
  Rng rng = make_rng(13);
  const ExpectationPotential e =
      expectation_potential(b, Ensemble::sphere(), 20000, potential_rule(16, 16), rng);
  const double expected = sphere_log_moment(b.dimension()) / p;
  EXPECT_NEAR(e.l1_norm, expected, 0.03 * expected);
}
