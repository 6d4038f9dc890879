#include "funcbreak/stats.hpp"

#include "funcbreak/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace funcbreak::stats {

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw DataError("quantile of an empty sample");
    if (q <= 0.0) return sorted.front();
    if (q >= 1.0) return sorted.back();
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> sample, double q) {
    std::sort(sample.begin(), sample.end());
    return quantile_sorted(sample, q);
}

double median(std::vector<double> sample) { return quantile(std::move(sample), 0.5); }

double mean(std::span<const double> sample) {
    if (sample.empty()) throw DataError("mean of an empty sample");
    return std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(sample.size());
}

double stdev(std::span<const double> sample) {
    if (sample.size() < 2) return 0.0;
    const double m = mean(sample);
    double ss = 0.0;
    for (double v : sample) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(sample.size() - 1));
}

double kolmogorov_survival(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 0.3) {
        // Dual series converges fast for small x: P(K <= x) = sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2)).
        double s = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double t = (2.0 * k - 1.0) * M_PI;
            s += std::exp(-t * t / (8.0 * x * x));
        }
        return 1.0 - std::sqrt(2.0 * M_PI) / x * s;
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DataError("KS test needs two non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    const double sq = std::sqrt(ne);
    // Stephens' small-sample correction.
    const double lambda = (sq + 0.12 + 0.11 / sq) * d;
    return {d, kolmogorov_survival(lambda)};
}

KsResult ks_uniform(std::vector<double> sample) {
    if (sample.empty()) throw DataError("KS test on an empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = std::clamp(sample[i], 0.0, 1.0);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    const double sq = std::sqrt(n);
    return {d, kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d)};
}

}  // namespace funcbreak::stats
