#pragma once

#include "funcbreak/cusum.hpp"
#include "funcbreak/longrun.hpp"
#include "funcbreak/random.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

namespace funcbreak {

inline constexpr int kDefaultXiReps = 10000;

/// Mean of curves after k minus mean of curves up to k.
template <typename Derived>
Curve<typename Derived::Scalar> estimate_break_function(const Eigen::MatrixBase<Derived>& curves, Eigen::Index k) {
    const Eigen::Index n = curves.rows();
    if (k < 1 || k > n - 1) throw DataError("break date must lie in 1..n-1");
    return (curves.bottomRows(n - k).colwise().mean() - curves.topRows(k).colwise().mean()).transpose();
}

/// Quadratic form delta' C delta / ||delta||^2.
template <typename K, typename V>
typename K::Scalar sigma2_hat(const Eigen::MatrixBase<K>& kernel, const Eigen::MatrixBase<V>& delta) {
    const auto nsq = delta.squaredNorm();
    if (!(nsq > 0)) throw NumericalError("break function estimate is zero");
    return delta.dot(kernel * delta) / nsq;
}

/// Discretization of the two-sided drifted Brownian motion on [-L, L] with step dx.
struct LimitProcessConfig {
    double half_width;
    double step;
    int reps;
    std::uint64_t seed;

    /// L = 50 sigma^2 / min(theta, 1 - theta)^2, step = L / 5000.
    static LimitProcessConfig defaults(double theta, double sigma2, int reps = kDefaultXiReps, std::uint64_t seed = 0);
    void validate() const;
};

struct XiSample {
    std::vector<double> draws;  // ascending
    bool degenerate = false;    // sigma^2 == 0
};

/// R draws of the leftmost argmax of Q(x) = (1 - theta) x + sigma W(x) for x < 0, -theta x + sigma W(x)
/// for x >= 0, with W a two-sided Brownian motion.
XiSample simulate_xi(double theta, double sigma2, const LimitProcessConfig& config);

/// sigma^2 times the sigma = 1 sample under default discretization. Equals simulate_xi with default
/// configs because the grid scales with sigma^2 (Brownian scaling).
XiSample scaled_xi_sample(double theta, double sigma2, int reps, std::uint64_t seed);

struct Interval {
    double lo;
    double hi;
};

/// (k - Xi_{1-alpha/2} / ||delta||^2, k - Xi_{alpha/2} / ||delta||^2).
Interval confidence_interval(Eigen::Index k_hat, const Eigen::VectorXd& delta_hat, std::span<const double> xi_sorted,
                             double alpha);

/// Argmax positions j/G of sum_l lambda_l B_l(j/G)^2 (leftmost maximizer).
std::vector<double> no_break_argmax_sample(std::span<const double> eigenvalues, int reps, int grid, std::uint64_t seed);

/// (rng, rows) -> rows x D matrix of consecutive errors in time order.
using ErrorGenerator = std::function<Eigen::MatrixXd(Rng&, Eigen::Index)>;

/// Draws of the smallest maximizer of P(k) over |k| <= window, where P(k) = -theta ||delta||^2 k + <delta, S_k>
/// for k >= 0 and (1 - theta) ||delta||^2 k + <delta, S_k> for k < 0.
std::vector<int> simulate_fixed_break_limit(const Eigen::VectorXd& delta, double theta, const ErrorGenerator& errors,
                                            int window, int reps, std::uint64_t seed);

struct DatingOptions {
    double alpha = 0.05;
    LongRunConfig longrun;
    int xi_reps = kDefaultXiReps;
    std::uint64_t seed = 0;
    bool conservative = false;
};

struct DatingReport {
    Eigen::Index n = 0;
    Eigen::Index k_hat = 1;
    double theta_hat = 0.0;
    Eigen::VectorXd delta_hat;
    double sigma2_hat = 0.0;
    double lambda1 = 0.0;
    double sigma2_used = 0.0;  // lambda1 when conservative
    bool conservative = false;
    bool degenerate = false;   // sigma2_used == 0
    std::map<double, double> xi_quantiles;
    Interval ci{};          // raw
    Interval ci_clamped{};  // clamped to [1, n]
    double h = 0.0;
};

/// Break date, break function, nuisance estimates and confidence interval. Throws NumericalError when
/// sigma2_hat exceeds the leading long-run eigenvalue.
DatingReport date_break(const CoeffMatrix<double>& curves, const DatingOptions& options);

/// Same as date_break but with a caller-supplied long-run kernel and Xi sampler (used by experiment runners
/// that cache unit-variance samples per theta).
DatingReport date_break_with(const CoeffMatrix<double>& curves, const KernelMatrix<double>& longrun_kernel,
                             double alpha, bool conservative,
                             const std::function<XiSample(double theta, double sigma2)>& xi_sampler);

}  // namespace funcbreak
