#include "funcbreak/fpca.hpp"

#include <cmath>
#include <string>

namespace funcbreak {

int tve_dimension(std::span<const double> eigenvalues, double tve) {
    if (!(tve > 0.0 && tve <= 1.0)) throw DataError("TVE must lie in (0,1]");
    double total = 0.0;
    for (double v : eigenvalues) total += std::max(0.0, v);
    if (!(total > 0.0)) throw NumericalError("TVE undefined for an all-zero spectrum");
    double acc = 0.0;
    int last_positive = 0;
    for (std::size_t l = 0; l < eigenvalues.size(); ++l) {
        if (eigenvalues[l] > 0.0) last_positive = static_cast<int>(l) + 1;
        acc += std::max(0.0, eigenvalues[l]);
        // Relative slack keeps tve = 1 from failing on rounding in the running sum.
        if (acc >= tve * total * (1.0 - 1e-12)) return std::max(static_cast<int>(l) + 1, 1);
    }
    return last_positive;
}

FpcaModel fit_fpca(const CoeffMatrix<double>& curves, int d) {
    if (d < 1 || d > curves.cols()) throw DataError("fPCA dimension must lie in 1..D");
    FpcaModel m;
    m.covariance = sample_cov_kernel(curves);
    m.eig = eigen_decompose(m.covariance);
    m.d = d;
    const double top = m.eig.values(0);
    const double last = m.eig.values(d - 1);
    if (!(top > 0.0) || !(last > 1e-12 * top))
        throw NumericalError("sample covariance is rank deficient at dimension " + std::to_string(d));
    const Eigen::MatrixXd centered = curves.rowwise() - curves.colwise().mean();
    m.scores = centered * m.eig.vectors.leftCols(d);
    return m;
}

FpcaStatistic fpca_statistic(const FpcaModel& model) {
    const Eigen::Index n = model.scores.rows();
    const Eigen::VectorXd inv = model.eig.values.head(model.d).cwiseInverse();
    FpcaStatistic out;
    out.d = model.d;
    out.per_k = Eigen::VectorXd::Zero(n + 1);
    // Scores are centered, so the score CUSUM is the plain partial sum.
    Eigen::VectorXd partial = Eigen::VectorXd::Zero(model.d);
    for (Eigen::Index k = 1; k < n; ++k) {
        partial += model.scores.row(k - 1).transpose();
        out.per_k(k) = partial.cwiseProduct(partial).dot(inv) / static_cast<double>(n);
    }
    out.k_tilde = first_argmax(out.per_k);
    out.stat = out.per_k(out.k_tilde);
    return out;
}

FpcaStatistic fpca_statistic(const CoeffMatrix<double>& curves, int d) { return fpca_statistic(fit_fpca(curves, d)); }

Eigen::VectorXd aligned_direction(const Eigen::VectorXd& phi1, const Eigen::VectorXd& cusum, Eigen::Index n,
                                  double gamma) {
    if (!(gamma > 0.0 && gamma < 0.5)) throw DataError("alignment exponent must lie in (0, 1/2)");
    const double s = phi1.dot(cusum) < 0.0 ? -1.0 : 1.0;
    const Eigen::VectorXd raw = phi1 / std::pow(static_cast<double>(n), gamma) + s * cusum;
    const double len = raw.norm();
    if (!(len > 0.0)) throw NumericalError("aligned direction is zero");
    return raw / len;
}

AlignedStatistic aligned_statistic(const CoeffMatrix<double>& curves, const KernelMatrix<double>& longrun_kernel,
                                   double gamma) {
    const Eigen::Index n = curves.rows();
    const auto eig = eigen_decompose(longrun_kernel);
    AlignedStatistic out;
    out.k_used = estimate_break_date(curves);
    // cusum_at already carries one factor n^{-1/2}; the second keeps the CUSUM term O(n^{-1/2}) without a break.
    const Eigen::VectorXd cusum = cusum_at(curves, out.k_used) / std::sqrt(static_cast<double>(n));
    out.direction = aligned_direction(eig.vectors.col(0), cusum, n, gamma);
    out.variance = out.direction.dot(longrun_kernel * out.direction);
    if (!(out.variance > 0.0)) throw NumericalError("long-run variance along the aligned direction is zero");
    const Eigen::VectorXd projected = curves * out.direction;
    out.stat = cusum_norm_sq(projected).maxCoeff() / out.variance;
    return out;
}

}  // namespace funcbreak
