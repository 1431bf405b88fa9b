#pragma once

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace ppinv {

// Streaming mean / standard error accumulator (plain sums; callers that need
// worker-count invariance combine per-chunk instances in fixed order).
struct running_stats {
    long n = 0;
    double sum = 0.0;
    double sumsq = 0.0;

    void add(double x) {
        ++n;
        sum += x;
        sumsq += x * x;
    }
    void merge(const running_stats& o) {
        n += o.n;
        sum += o.sum;
        sumsq += o.sumsq;
    }
    double mean() const { return n ? sum / n : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double v = (sumsq - n * m * m) / (n - 1);
        return v > 0.0 ? v : 0.0;
    }
    double std_error() const { return n ? std::sqrt(variance() / n) : 0.0; }
};

inline double chi_square_pvalue(double stat, double dof) {
    if (stat <= 0.0) return 1.0;
    return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

inline double normal_two_sided_pvalue(double z) {
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

// Upper tail P(Bin(n, p) >= k) via the regularized incomplete beta.
inline double binomial_upper_pvalue(long k, long n, double p) {
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    return boost::math::ibeta(static_cast<double>(k), static_cast<double>(n - k + 1), p);
}

// Kolmogorov asymptotic tail 2 sum (-1)^{j-1} exp(-2 j^2 x^2).
inline double kolmogorov_tail(double x) {
    if (x <= 0.0) return 1.0;
    double s = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double t = 2.0 * std::exp(-2.0 * j * j * x * x);
        s += (j % 2 == 1) ? t : -t;
        if (t < 1e-16) break;
    }
    return std::min(1.0, std::max(0.0, s));
}

struct ks_result {
    double statistic;
    double p_value;
};

// One-sample KS test against Uniform(0,1), Stephens' small-sample correction.
inline ks_result ks_uniform(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double c = sample[i];
        d = std::max(d, std::max((i + 1) / n - c, c - i / n));
    }
    const double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    return {d, kolmogorov_tail(lam)};
}

} // namespace ppinv
