#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "randsec/error.hpp"
#include "randsec/weights.hpp"

using namespace randsec;

TEST(Weights, FubiniStudyClosedForms) {
  const Weight w = Weight::fubini_study();
  const Complex z(0.3, -1.7);
  EXPECT_NEAR(w.eval(z), 0.5 * std::log1p(std::norm(z)), 1e-15);
  EXPECT_NEAR(w.curvature_density(z), 1.0, 1e-14);
  EXPECT_NEAR(w.radial_mass(2.0), 4.0 / 5.0, 1e-15);
  EXPECT_DOUBLE_EQ(w.radial_mass(std::numeric_limits<double>::infinity()), 1.0);
  EXPECT_DOUBLE_EQ(w.total_mass(), 1.0);
  EXPECT_DOUBLE_EQ(w.strict_positivity(), 1.0);
  EXPECT_NEAR(w.lelong_constant(), 0.5 * std::numbers::ln2, 1e-15);
  EXPECT_TRUE(w.is_radial());
  EXPECT_EQ(w.center(), Complex(0.0, 0.0));
}

TEST(Weights, PotentialDoesNotOverflow) {
  EXPECT_NEAR(fs_potential_value(Complex(1e200, 0.0)), std::log(1e200), 1e-12);
  EXPECT_EQ(fs_potential_value(Complex(0.0, 0.0)), 0.0);
}

TEST(Weights, ScaledFs) {
  const Weight w = Weight::scaled_fs(0.5);
  EXPECT_NEAR(w.eval(Complex(1.0, 1.0)), 0.25 * std::log(3.0), 1e-15);
  EXPECT_NEAR(w.curvature_density(Complex(2.0, 0.0)), 0.5, 1e-14);
  EXPECT_NEAR(w.radial_mass(1.0), 0.25, 1e-15);
  EXPECT_DOUBLE_EQ(w.total_mass(), 0.5);
  EXPECT_THROW(Weight::scaled_fs(0.0), InvalidConfiguration);
  EXPECT_THROW(Weight::scaled_fs(1.5), InvalidConfiguration);
}

TEST(Weights, TranslatedFs) {
  const Complex c(1.0, 0.0);
  const Weight w = Weight::translated_fs(c);
  EXPECT_EQ(w.center(), c);
  EXPECT_NEAR(w.eval(c), 0.0, 1e-15);
  // At the center the moved form is (1 + |c|^2)^2 times omega_FS.
  EXPECT_NEAR(w.curvature_density(c), 4.0, 1e-13);
  EXPECT_NEAR(w.radial_mass(1.0), 0.5, 1e-15);
  EXPECT_GT(w.strict_positivity(), 0.0);
  EXPECT_LT(w.strict_positivity(), 1.0);
}

TEST(Weights, FiniteDifferenceCurvatureAgrees) {
  for (const Weight& w : {Weight::fubini_study(), Weight::scaled_fs(0.7),
                          Weight::translated_fs(Complex(-0.5, 2.0))}) {
    for (Complex z : {Complex(0.1, 0.2), Complex(-1.5, 0.7), Complex(3.0, -2.0)}) {
      EXPECT_NEAR(w.fd_curvature_density(z) / w.curvature_density(z), 1.0, 1e-5) << w.describe();
    }
  }
}

TEST(Weights, CustomRegistry) {
  const auto names = custom_weight_names();
  EXPECT_NE(std::find(names.begin(), names.end(), "quartic"), names.end());
  EXPECT_NE(std::find(names.begin(), names.end(), "two_center"), names.end());
  const Weight& q = custom_weight("quartic");
  EXPECT_EQ(q.kind(), WeightKind::Custom);
  // phi = (1/4) log(1 + |z|^4): the curvature vanishes at the origin.
  EXPECT_NEAR(q.curvature_density(Complex(0.0, 0.0)), 0.0, 1e-5);
  EXPECT_NEAR(q.radial_mass(1.0), 0.5, 1e-6);
  EXPECT_FALSE(custom_weight("two_center").is_radial());
  EXPECT_THROW(custom_weight("missing"), InvalidConfiguration);
}

TEST(Weights, HashIsStableAndSeparates) {
  EXPECT_EQ(Weight::scaled_fs(0.5).hash(), Weight::scaled_fs(0.5).hash());
  EXPECT_NE(Weight::scaled_fs(0.5).hash(), Weight::scaled_fs(0.25).hash());
  EXPECT_NE(Weight::fubini_study().hash(), Weight::translated_fs(Complex(1.0, 0.0)).hash());
}

TEST(Weights, BlendAndEffectiveWeight) {
  const Weight fs = Weight::fubini_study();
  const Weight half = Weight::scaled_fs(0.5);
  const Weight b = Weight::blend(3.0, half, 2.0, fs);
  const Complex z(0.4, 1.1);
  EXPECT_NEAR(b.eval(z), 3.0 * half.eval(z) + 2.0 * fs.eval(z), 1e-14);
  EXPECT_NEAR(b.total_mass(), 3.5, 1e-15);
  EXPECT_NEAR(b.curvature_density(z), 3.5, 1e-12);

  const WeightSequence plain(half);
  EXPECT_EQ(plain.regularizer_count(40), 0);
  EXPECT_NEAR(effective_weight(plain, 40).eval(z), 40.0 * half.eval(z), 1e-12);

  const WeightSequence table(half, std::map<int, int>{{10, 2}});
  EXPECT_EQ(table.regularizer_count(10), 2);
  EXPECT_NEAR(effective_weight(table, 10).eval(z), 8.0 * half.eval(z) + 2.0 * fs.eval(z), 1e-12);
  EXPECT_THROW(table.regularizer_count(11), InvalidConfiguration);

  const WeightSequence sq(half, RegularizerRule::Sqrt);
  EXPECT_GT(sq.regularizer_count(100), 0);
  EXPECT_LE(sq.regularizer_count(100), 100);
}
