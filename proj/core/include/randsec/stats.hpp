#ifndef RANDSEC_STATS_HPP_
#define RANDSEC_STATS_HPP_

#include <span>
#include <vector>

namespace randsec::stats {

double mean(std::span<const double> x);
// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> x);
// Linear-interpolation quantile (Hyndman-Fan type 7), q in [0, 1].
double quantile(std::span<const double> x, double q);
double median(std::span<const double> x);

struct Summary {
  double mean = 0;
  double stddev = 0;
  double q10 = 0;
  double q25 = 0;
  double median = 0;
  double q75 = 0;
  double q90 = 0;
  std::size_t count = 0;
};
Summary summarize(std::span<const double> x);

// Kolmogorov-Smirnov distance between the empirical law of u (values in
// [0, 1]) and the uniform law on [0, 1].
double ks_uniform(std::vector<double> u);

// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
};
// Ordinary least squares y = intercept + slope * x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace randsec::stats

#endif  // RANDSEC_STATS_HPP_
