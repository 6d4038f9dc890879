#pragma once

#include "funcbreak/cusum.hpp"
#include "funcbreak/longrun.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace funcbreak {

inline constexpr int kDefaultNullReps = 1000;
inline constexpr int kDefaultBridgeGrid = 1000;

struct NullLimitSample {
    std::vector<double> draws;  // ascending
    bool degenerate = false;    // all eigenvalues were zero
};

/// R draws of sup_x sum_l lambda_l B_l(x)^2, each Brownian bridge built on a G-step grid from
/// Gaussian increments of variance 1/G. Draw r uses its own stream derived from (seed, r), so the
/// output does not depend on evaluation order. Negative eigenvalues are clipped to zero.
NullLimitSample simulate_null_limit(std::span<const double> eigenvalues, int reps, int grid, std::uint64_t seed);

/// Precomputed squared Brownian bridges, reusable across many detector evaluations that share
/// the same dimension. Draw r matches simulate_null_limit's draw r up to single-precision storage.
class NullLimitBank {
public:
    NullLimitBank(int dimension, int reps, int grid, std::uint64_t seed);

    int dimension() const noexcept { return dimension_; }
    int reps() const noexcept { return reps_; }
    int grid() const noexcept { return grid_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Full sorted sample for the given eigenvalues (length <= dimension; missing entries are zero).
    NullLimitSample sample(std::span<const double> eigenvalues) const;

    /// #{r : sup_x sum_l lambda_l B_{r,l}(x)^2 >= threshold}.
    int exceedances(std::span<const double> eigenvalues, double threshold) const;

private:
    Eigen::VectorXf weights(std::span<const double> eigenvalues) const;
    double draw(int r, const Eigen::VectorXf& w) const;

    int dimension_;
    int reps_;
    int grid_;
    std::uint64_t seed_;
    std::vector<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> squares_;
    Eigen::MatrixXf maxima_;  // reps x dimension, per-bridge sup of B^2
};

/// Monte Carlo p-value (1 + #{draws >= stat}) / (R + 1).
double mc_p_value(int exceed, int reps);

struct DetectionReport {
    double stat = 0.0;
    Eigen::Index k_hat = 1;
    double alpha = 0.05;
    std::map<double, double> critical_values;  // alpha -> (1 - alpha) quantile
    double p_value = 1.0;
    bool reject = false;
    Eigen::VectorXd eigenvalues_used;
    LongRunConfig longrun;
    double h = 0.0;
    double adaptive_constant = 0.0;
    int reps = kDefaultNullReps;
    int grid = kDefaultBridgeGrid;
    std::uint64_t seed = 0;
    bool degenerate = false;
};

/// Fully functional test of a constant mean against a single mean break.
DetectionReport test(const CoeffMatrix<double>& curves, double alpha, const LongRunConfig& longrun, int reps,
                     std::uint64_t seed, int grid = kDefaultBridgeGrid);

/// Same test with critical values drawn from a shared bridge bank.
DetectionReport test(const CoeffMatrix<double>& curves, double alpha, const LongRunConfig& longrun,
                     const NullLimitBank& bank);

/// Eigenvalues of a long-run kernel clipped at zero.
Eigen::VectorXd clipped_eigenvalues(const KernelMatrix<double>& kernel);

}  // namespace funcbreak
