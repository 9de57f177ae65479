#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <vector>

namespace testutil {

inline double mean(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double variance(std::span<const double> x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

inline std::complex<double> empirical_cf(std::span<const double> x, double theta) {
    double c = 0.0, s = 0.0;
    for (double v : x) {
        c += std::cos(theta * v);
        s += std::sin(theta * v);
    }
    const double n = static_cast<double>(x.size());
    return {c / n, s / n};
}

// Asymptotic Kolmogorov tail P(sup|B| > lambda).
inline double kolmogorov_tail(double lambda) {
    if (lambda < 0.2) return 1.0;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(p, 0.0, 1.0);
}

inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

inline double ks_two_sample_p(const std::vector<double>& a, const std::vector<double>& b) {
    const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
    const double d = ks_statistic(a, b);
    return kolmogorov_tail((std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d);
}

// Kolmogorov distance between a sample and a continuous CDF.
template <class F>
double ks_one_sample(std::vector<double> x, F cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F0 = cdf(x[i]);
        d = std::max({d, std::abs((i + 1) / n - F0), std::abs(i / n - F0)});
    }
    return d;
}

}  // namespace testutil
