#pragma once

#include <span>
#include <vector>

namespace scrisk {

double sigmoid(double z);

double mean(std::span<const double> v);
double sample_sd(std::span<const double> v);  // n-1 denominator

// Even-length median is the mean of the two central order statistics.
double median(std::vector<double> v);

// Nearest-rank quantile (q in [0,1]) of an already sorted vector.
double nearest_rank_quantile(std::span<const double> sorted, double q);

// Percentile of `value` within `population`, mean-rank tie convention:
// 100 * (count_less + 0.5 * count_equal) / n.
double percentile_of(double value, std::span<const double> population);

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p-value for a Student t statistic with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    int df = 0;
};

// Paired t-test of observed vs expected series (equal lengths >= 2).
// Throws ValidationError when the differences have zero variance.
TTestResult paired_t_test(std::span<const double> observed, std::span<const double> expected);

}  // namespace scrisk
