#pragma once

#include <span>
#include <vector>

namespace funcbreak::stats {

/// Linear-interpolation quantile (Hyndman-Fan type 7) of an ascending sample.
double quantile_sorted(std::span<const double> sorted, double q);

/// Sorts a copy and returns the type-7 quantile.
double quantile(std::vector<double> sample, double q);

double median(std::vector<double> sample);
double mean(std::span<const double> sample);
double stdev(std::span<const double> sample);

/// Kolmogorov distribution survival function P(K > x) for the limit of sqrt(n) * D_n.
double kolmogorov_survival(double x);

struct KsResult {
    double statistic;
    double p_value;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
/// Ties across samples are handled by evaluating both ECDFs past each distinct value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample KS test against Uniform(0,1).
KsResult ks_uniform(std::vector<double> sample);

}  // namespace funcbreak::stats
