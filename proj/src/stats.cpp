#include "scrisk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scrisk/error.hpp"

namespace scrisk {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double mean(std::span<const double> v) {
    require_internal(!v.empty(), "mean of empty span");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
    require_internal(v.size() >= 2, "sample_sd needs n >= 2");
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
    require_internal(!v.empty(), "median of empty vector");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double nearest_rank_quantile(std::span<const double> sorted, double q) {
    require_internal(!sorted.empty(), "quantile of empty span");
    require_internal(q >= 0.0 && q <= 1.0, "quantile q out of [0,1]");
    const std::size_t n = sorted.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    if (rank == 0) rank = 1;
    if (rank > n) rank = n;
    return sorted[rank - 1];
}

double percentile_of(double value, std::span<const double> population) {
    require_internal(!population.empty(), "percentile over empty population");
    std::size_t less = 0, equal = 0;
    for (double x : population) {
        if (x < value) ++less;
        else if (x == value) ++equal;
    }
    return 100.0 * (static_cast<double>(less) + 0.5 * static_cast<double>(equal)) /
           static_cast<double>(population.size());
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3.0e-14;
    constexpr double kTiny = 1.0e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    require_internal(a > 0.0 && b > 0.0, "incomplete beta: a,b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    require_internal(df > 0.0, "t-test: df must be positive");
    if (!std::isfinite(t)) return 0.0;
    const double x = df / (df + t * t);
    return regularized_incomplete_beta(0.5 * df, 0.5, x);
}

TTestResult paired_t_test(std::span<const double> observed, std::span<const double> expected) {
    require(observed.size() == expected.size(), "paired_t_test: length mismatch");
    require(observed.size() >= 2, "paired_t_test: need at least 2 pairs");
    const std::size_t n = observed.size();
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = observed[i] - expected[i];
    const double m = mean(diff);
    const double sd = sample_sd(diff);
    require(sd > 0.0, "paired_t_test: zero variance of differences");
    TTestResult r;
    r.df = static_cast<int>(n) - 1;
    r.t = m / (sd / std::sqrt(static_cast<double>(n)));
    r.p = student_t_two_sided_p(r.t, static_cast<double>(r.df));
    return r;
}

}  // namespace scrisk
