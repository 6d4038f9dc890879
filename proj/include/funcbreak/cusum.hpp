#pragma once

#include "funcbreak/fda.hpp"

namespace funcbreak {

/// ||S0_{n,k}||^2 for k = 0..n from one prefix-sum pass, where
/// S0_{n,k} = n^{-1/2} (sum_{i<=k} X_i - (k/n) sum_{i<=n} X_i).
template <typename Derived>
Curve<typename Derived::Scalar> cusum_norm_sq(const Eigen::MatrixBase<Derived>& curves) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = curves.rows();
    if (n < 2) throw DataError("CUSUM needs at least two curves");
    const Curve<Scalar> total = curves.colwise().sum().transpose();
    const Scalar nn = Scalar(n);
    Curve<Scalar> out(n + 1);
    Curve<Scalar> partial = Curve<Scalar>::Zero(curves.cols());
    out(0) = Scalar(0);
    for (Eigen::Index k = 1; k < n; ++k) {
        partial += curves.row(k - 1).transpose();
        out(k) = (partial - (Scalar(k) / nn) * total).squaredNorm() / nn;
    }
    out(n) = Scalar(0);
    return out;
}

/// Scaled CUSUM curve S0_{n,k}.
template <typename Derived>
Curve<typename Derived::Scalar> cusum_at(const Eigen::MatrixBase<Derived>& curves, Eigen::Index k) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = curves.rows();
    if (k < 0 || k > n) throw DataError("CUSUM index out of range");
    const Curve<Scalar> total = curves.colwise().sum().transpose();
    const Curve<Scalar> partial = k == 0 ? Curve<Scalar>(Curve<Scalar>::Zero(curves.cols()))
                                         : Curve<Scalar>(curves.topRows(k).colwise().sum().transpose());
    return (partial - (Scalar(k) / Scalar(n)) * total) / std::sqrt(Scalar(n));
}

/// Smallest k in 1..n attaining the maximum of values(k); values has length n+1.
template <typename Derived>
Eigen::Index first_argmax(const Eigen::MatrixBase<Derived>& values) {
    Eigen::Index best = 1;
    for (Eigen::Index k = 2; k < values.size(); ++k)
        if (values(k) > values(best)) best = k;
    return best;
}

/// T_n = max_{1<=k<=n} ||S0_{n,k}||^2.
template <typename Derived>
typename Derived::Scalar detector_stat(const Eigen::MatrixBase<Derived>& curves) {
    return cusum_norm_sq(curves).tail(curves.rows()).maxCoeff();
}

/// Smallest maximizer of ||S0_{n,k}|| over 1..n; always <= n-1 when n >= 2.
template <typename Derived>
Eigen::Index estimate_break_date(const Eigen::MatrixBase<Derived>& curves) {
    return first_argmax(cusum_norm_sq(curves));
}

}  // namespace funcbreak
