#pragma once

#include "funcbreak/cusum.hpp"
#include "funcbreak/fda.hpp"

#include <span>

namespace funcbreak {

/// (1/n) sum (X_i - Xbar)(X_i - Xbar)^T.
template <typename Derived>
KernelMatrix<typename Derived::Scalar> sample_cov_kernel(const Eigen::MatrixBase<Derived>& curves) {
    using Scalar = typename Derived::Scalar;
    if (curves.rows() < 2) throw DataError("sample covariance needs at least two curves");
    const CoeffMatrix<Scalar> centered = curves.rowwise() - curves.colwise().mean();
    const KernelMatrix<Scalar> k = centered.transpose() * centered / Scalar(curves.rows());
    return (k + k.transpose()) / Scalar(2);
}

/// Smallest d with cumulative explained fraction >= tve (negative eigenvalues count as zero).
int tve_dimension(std::span<const double> eigenvalues, double tve);

struct FpcaModel {
    KernelMatrix<double> covariance;
    EigenSystem<double> eig;
    int d = 1;
    Eigen::MatrixXd scores;  // n x d, <X_i - Xbar, psi_l>
};

/// Throws NumericalError unless tau_d > 1e-12 tau_1 > 0.
FpcaModel fit_fpca(const CoeffMatrix<double>& curves, int d);

struct FpcaStatistic {
    double stat = 0.0;
    Eigen::VectorXd per_k;  // R_{n,k}, k = 0..n
    Eigen::Index k_tilde = 1;
    int d = 1;
};

/// Maximally selected quadratic form of the score CUSUM, normalized by the leading d sample eigenvalues.
FpcaStatistic fpca_statistic(const CoeffMatrix<double>& curves, int d);
FpcaStatistic fpca_statistic(const FpcaModel& model);

inline constexpr double kDefaultAlignmentExponent = 0.25;

/// phi1 / n^gamma + s * cusum, normalized, with s the sign of <phi1, cusum>.
Eigen::VectorXd aligned_direction(const Eigen::VectorXd& phi1, const Eigen::VectorXd& cusum, Eigen::Index n,
                                  double gamma);

struct AlignedStatistic {
    double stat = 0.0;
    Eigen::VectorXd direction;
    double variance = 0.0;  // u' C u, the long-run variance along the aligned direction
    Eigen::Index k_used = 1;
};

/// One-dimensional detector along the aligned direction built from the leading eigenfunction of the
/// long-run kernel and the functional CUSUM at its argmax; compare against sup B(x)^2.
AlignedStatistic aligned_statistic(const CoeffMatrix<double>& curves, const KernelMatrix<double>& longrun_kernel,
                                   double gamma = kDefaultAlignmentExponent);

}  // namespace funcbreak
