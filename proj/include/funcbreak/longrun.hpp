#pragma once

#include "funcbreak/cusum.hpp"
#include "funcbreak/fda.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace funcbreak {

enum class WeightKind { Bartlett, Parzen, FlatTop };

/// Properties of a lag-window taper: w(0) = 1, symmetric, zero outside [-support, support].
struct WeightFunction {
    WeightKind kind;
    double order;             // tau
    double q_constant;        // lim x^{-tau} (1 - w(x)); NaN when not of finite order
    double support;           // m
    double squared_integral;  // integral of w^2 over the real line
};

WeightFunction weight_function(WeightKind kind);
double weight(WeightKind kind, double x);
std::string_view to_string(WeightKind kind);
WeightKind parse_weight(std::string_view name);

enum class BandwidthKind { CubeRoot, FourthRoot, FifthRoot, Adaptive };

std::string_view to_string(BandwidthKind kind);
BandwidthKind parse_bandwidth(std::string_view name);

/// n^exponent for the fixed rules; throws for Adaptive.
double bandwidth(BandwidthKind rule, Eigen::Index n);

namespace detail {

template <typename Derived>
CoeffMatrix<typename Derived::Scalar> segment_residuals(const Eigen::MatrixBase<Derived>& curves, Eigen::Index split) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = curves.rows();
    if (split < 1 || split > n - 1) throw DataError("split point must lie in 1..n-1");
    CoeffMatrix<Scalar> e = curves;
    const Curve<Scalar> pre = curves.topRows(split).colwise().mean().transpose();
    const Curve<Scalar> post = curves.bottomRows(n - split).colwise().mean().transpose();
    e.topRows(split).rowwise() -= pre.transpose();
    e.bottomRows(n - split).rowwise() -= post.transpose();
    return e;
}

template <typename Scalar>
KernelMatrix<Scalar> lag_product(const CoeffMatrix<Scalar>& e, Eigen::Index lag) {
    const Eigen::Index n = e.rows();
    const Eigen::Index a = lag >= 0 ? lag : -lag;
    KernelMatrix<Scalar> g = e.topRows(n - a).transpose() * e.bottomRows(n - a) / Scalar(n);
    return lag >= 0 ? g : KernelMatrix<Scalar>(g.transpose());
}

}  // namespace detail

/// gamma_l = n^{-1} sum_{i in I_l} (X_i - Xbar*_i)(X_{i+l} - Xbar*_{i+l})^T, with Xbar* the
/// segment mean on either side of split.
template <typename Derived>
KernelMatrix<typename Derived::Scalar> autocov_kernel(const Eigen::MatrixBase<Derived>& curves, Eigen::Index lag,
                                                      Eigen::Index split) {
    const Eigen::Index n = curves.rows();
    if (lag <= -n || lag >= n) throw DataError("lag must satisfy |lag| < n");
    return detail::lag_product(detail::segment_residuals(curves, split), lag);
}

/// Lag-window estimate sum_{|l| <= m h} w(l/h) gamma_l, symmetrized.
template <typename Derived>
KernelMatrix<typename Derived::Scalar> longrun_kernel(const Eigen::MatrixBase<Derived>& curves, WeightKind kind, double h,
                                                      Eigen::Index split) {
    using Scalar = typename Derived::Scalar;
    if (!(h >= 1.0)) throw DataError("bandwidth must be at least 1");
    const auto e = detail::segment_residuals(curves, split);
    const Eigen::Index n = curves.rows();
    const double reach = weight_function(kind).support * h;
    const Eigen::Index max_lag = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(std::floor(reach)));
    KernelMatrix<Scalar> c = detail::lag_product(e, 0);
    for (Eigen::Index l = 1; l <= max_lag; ++l) {
        const double w = weight(kind, static_cast<double>(l) / h);
        if (w == 0.0) continue;
        const KernelMatrix<Scalar> g = detail::lag_product(e, l);
        c += Scalar(w) * (g + g.transpose());
    }
    return (c + c.transpose()) / Scalar(2);
}

/// Data-driven bandwidth M n^{1/(1+2 tau)} with M from flat-top pilot estimates at h0 = n^{1/5}.
struct AdaptiveBandwidth {
    double h;
    double constant;  // M-hat
};

template <typename Derived>
AdaptiveBandwidth adaptive_bandwidth(const Eigen::MatrixBase<Derived>& curves, WeightKind kind, Eigen::Index split) {
    using Scalar = typename Derived::Scalar;
    const WeightFunction target = weight_function(kind);
    if (!std::isfinite(target.q_constant))
        throw DataError("adaptive bandwidth needs a finite-order weight (bartlett or parzen)");
    const Eigen::Index n = curves.rows();
    if (n < 4) throw DataError("adaptive bandwidth needs n >= 4");
    const auto e = detail::segment_residuals(curves, split);
    const double h0 = std::pow(static_cast<double>(n), 0.2);
    const WeightFunction pilot = weight_function(WeightKind::FlatTop);
    const Eigen::Index max_lag =
        std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(std::floor(pilot.support * h0)));
    KernelMatrix<Scalar> c = detail::lag_product(e, 0);
    KernelMatrix<Scalar> c_tau = KernelMatrix<Scalar>::Zero(c.rows(), c.cols());
    for (Eigen::Index l = 1; l <= max_lag; ++l) {
        const double w = weight(WeightKind::FlatTop, static_cast<double>(l) / h0);
        if (w == 0.0) continue;
        const KernelMatrix<Scalar> g = detail::lag_product(e, l);
        const KernelMatrix<Scalar> both = g + g.transpose();
        c += Scalar(w) * both;
        c_tau += Scalar(w * std::pow(static_cast<double>(l), target.order)) * both;
    }
    const double tau = target.order;
    const double num = 2.0 * tau * target.q_constant * target.q_constant * static_cast<double>(c_tau.squaredNorm());
    const double tr = static_cast<double>(c.trace());
    const double den = (static_cast<double>(c.squaredNorm()) + tr * tr) * target.squared_integral;
    if (!(den > 0.0)) throw NumericalError("adaptive bandwidth: pilot long-run kernel is zero");
    const double m = std::pow(num / den, 1.0 / (1.0 + 2.0 * tau));
    const double h = std::max(1.0, m * std::pow(static_cast<double>(n), 1.0 / (1.0 + 2.0 * tau)));
    return {h, m};
}

struct LongRunConfig {
    WeightKind weight = WeightKind::Bartlett;
    BandwidthKind bandwidth = BandwidthKind::FourthRoot;
};

struct LongRunEstimate {
    KernelMatrix<double> kernel;
    double h;
    double adaptive_constant;  // NaN unless the adaptive rule was used
    Eigen::Index split;
};

/// Break-adjusted estimate of the long-run covariance, demeaned around the CUSUM argmax.
LongRunEstimate estimate_longrun(const CoeffMatrix<double>& curves, const LongRunConfig& config);
LongRunEstimate estimate_longrun(const CoeffMatrix<double>& curves, const LongRunConfig& config, Eigen::Index split);

}  // namespace funcbreak
