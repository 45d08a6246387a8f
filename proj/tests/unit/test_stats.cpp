#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "randsec/error.hpp"
#include "randsec/stats.hpp"

using namespace randsec;

TEST(Stats, MomentsAndQuantiles) {
  const std::vector<double> x = {4.0, 1.0, 3.0, 2.0, 5.0};
  EXPECT_DOUBLE_EQ(stats::mean(x), 3.0);
  EXPECT_DOUBLE_EQ(stats::stddev(x), std::sqrt(2.5));
  EXPECT_DOUBLE_EQ(stats::median(x), 3.0);
  EXPECT_DOUBLE_EQ(stats::quantile(x, 0.1), 1.4);
  EXPECT_DOUBLE_EQ(stats::quantile(x, 1.0), 5.0);
  const std::vector<double> even = {1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(stats::median(even), 2.5);
  const stats::Summary s = stats::summarize(x);
  EXPECT_EQ(s.count, 5u);
  EXPECT_DOUBLE_EQ(s.q25, 2.0);
  EXPECT_DOUBLE_EQ(s.q75, 4.0);
  const std::vector<double> one = {7.0};
  EXPECT_DOUBLE_EQ(stats::stddev(one), 0.0);
}

TEST(Stats, KsUniform) {
  EXPECT_NEAR(stats::ks_uniform({0.5}), 0.5, 1e-15);
  EXPECT_NEAR(stats::ks_uniform({0.0, 0.25, 0.5, 0.75}), 0.25, 1e-15);
  EXPECT_NEAR(stats::ks_uniform({0.125, 0.375, 0.625, 0.875}), 0.125, 1e-15);
}

TEST(Stats, KsTwoSample) {
  EXPECT_DOUBLE_EQ(stats::ks_two_sample({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}), 0.0);
  EXPECT_DOUBLE_EQ(stats::ks_two_sample({1.0, 2.0}, {3.0, 4.0}), 1.0);
  EXPECT_DOUBLE_EQ(stats::ks_two_sample({1.0, 3.0}, {2.0, 4.0}), 0.5);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_DOUBLE_EQ(stats::ks_two_sample({1.0, inf}, {1.0, 2.0}), 0.5);
}

TEST(Stats, LinearFit) {
  const std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y = {1.0, 3.0, 5.0, 7.0};
  const stats::LinearFit f = stats::linear_fit(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  const std::vector<double> flat = {1.0, 1.0};
  EXPECT_THROW(stats::linear_fit(flat, flat), Error);
}
