#pragma once

#include "funcbreak/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace funcbreak {

template <typename Scalar>
using Curve = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Bivariate kernel in basis coordinates (D x D).
template <typename Scalar>
using KernelMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// n x D coefficient array, one curve per row.
template <typename Scalar>
using CoeffMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr int kDefaultBasisSize = 21;
inline constexpr int kDefaultGridSize = 365;

/// Orthonormal Fourier basis on [0,1]: v_1 = 1, then sqrt(2) sin(2 pi j t), sqrt(2) cos(2 pi j t)
/// for j = 1, 2, ...
template <typename Scalar>
class FourierBasis {
public:
    explicit FourierBasis(int size = kDefaultBasisSize, int grid_points = kDefaultGridSize)
        : size_(size), grid_(midpoint_grid(grid_points)) {
        validate();
    }

    FourierBasis(int size, std::vector<Scalar> grid) : size_(size), grid_(std::move(grid)) { validate(); }

    int size() const noexcept { return size_; }
    const std::vector<Scalar>& grid() const noexcept { return grid_; }

    /// v_{index+1}(t), index is zero-based.
    static Scalar value(int index, Scalar t) {
        using std::cos;
        using std::sin;
        using std::sqrt;
        if (index == 0) return Scalar(1);
        const Scalar freq = Scalar(2) * Scalar(M_PI) * Scalar((index + 1) / 2);
        return index % 2 == 1 ? sqrt(Scalar(2)) * sin(freq * t) : sqrt(Scalar(2)) * cos(freq * t);
    }

    /// Design matrix: rows are points, columns basis functions.
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> design(std::span<const Scalar> points) const {
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> x(static_cast<Eigen::Index>(points.size()), size_);
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const Scalar t = points[static_cast<std::size_t>(r)];
            if (!(t >= Scalar(0) && t <= Scalar(1)))
                throw DataError("evaluation point outside [0,1]: " + std::to_string(static_cast<double>(t)));
            for (int c = 0; c < size_; ++c) x(r, c) = value(c, t);
        }
        return x;
    }

    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> design() const { return design(grid_); }

    bool operator==(const FourierBasis& other) const { return size_ == other.size_ && grid_ == other.grid_; }

    /// (k - 0.5) / points for k = 1..points.
    static std::vector<Scalar> midpoint_grid(int points) {
        if (points < 1) throw DataError("grid needs at least one point");
        std::vector<Scalar> g(static_cast<std::size_t>(points));
        for (int k = 0; k < points; ++k) g[static_cast<std::size_t>(k)] = (Scalar(k) + Scalar(0.5)) / Scalar(points);
        return g;
    }

private:
    void validate() const {
        if (size_ < 1) throw DataError("basis size must be at least 1");
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            if (!(grid_[i] >= Scalar(0) && grid_[i] <= Scalar(1))) throw DataError("grid point outside [0,1]");
            if (i > 0 && !(grid_[i] > grid_[i - 1])) throw DataError("grid must be strictly increasing");
        }
    }

    int size_;
    std::vector<Scalar> grid_;
};

/// A sample of n >= 2 curves sharing one basis, with optional per-curve labels.
template <typename Scalar>
class CurveSeries {
public:
    CurveSeries(CoeffMatrix<Scalar> coeffs, FourierBasis<Scalar> basis, std::vector<std::string> labels = {})
        : coeffs_(std::move(coeffs)), basis_(std::move(basis)), labels_(std::move(labels)) {
        if (coeffs_.rows() < 2) throw DataError("a curve series needs at least two curves");
        if (coeffs_.cols() != basis_.size()) throw DataError("coefficient width does not match basis size");
        if (!coeffs_.allFinite()) throw DataError("curve coefficients must be finite");
        if (!labels_.empty() && static_cast<Eigen::Index>(labels_.size()) != coeffs_.rows())
            throw DataError("label count does not match curve count");
        if (labels_.empty()) {
            labels_.reserve(static_cast<std::size_t>(coeffs_.rows()));
            for (Eigen::Index i = 1; i <= coeffs_.rows(); ++i) labels_.push_back(std::to_string(i));
        }
    }

    Eigen::Index size() const noexcept { return coeffs_.rows(); }
    int dimension() const noexcept { return basis_.size(); }
    const CoeffMatrix<Scalar>& coeffs() const noexcept { return coeffs_; }
    const FourierBasis<Scalar>& basis() const noexcept { return basis_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    Curve<Scalar> curve(Eigen::Index i) const { return coeffs_.row(i).transpose(); }

private:
    CoeffMatrix<Scalar> coeffs_;
    FourierBasis<Scalar> basis_;
    std::vector<std::string> labels_;
};

/// Least-squares coefficients of one curve observed at points t (NaN values are skipped).
template <typename Scalar>
Curve<Scalar> project_curve(std::span<const Scalar> t, std::span<const Scalar> values, int basis_size,
                            Eigen::Index curve_index = 0) {
    if (t.size() != values.size()) throw DataError("point and value counts differ");
    std::vector<Scalar> pts;
    std::vector<Scalar> vals;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (std::isfinite(static_cast<double>(values[i]))) {
            pts.push_back(t[i]);
            vals.push_back(values[i]);
        }
    }
    if (static_cast<int>(pts.size()) < basis_size)
        throw DataError("degenerate fit for curve " + std::to_string(curve_index) + ": " + std::to_string(pts.size()) +
                        " usable points for " + std::to_string(basis_size) + " basis functions");
    const FourierBasis<Scalar> basis(basis_size, 1);
    const auto x = basis.design(pts);
    const Eigen::Map<const Curve<Scalar>> y(vals.data(), static_cast<Eigen::Index>(vals.size()));
    Eigen::ColPivHouseholderQR<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> qr(x);
    if (qr.rank() < basis_size)
        throw DataError("degenerate fit for curve " + std::to_string(curve_index) + ": design matrix is rank deficient");
    return qr.solve(y);
}

/// Projects curves sampled on basis.grid() (rows = curves, NaN = missing) onto the basis.
template <typename Scalar, typename Derived>
CurveSeries<Scalar> project_to_basis(const Eigen::MatrixBase<Derived>& samples, const FourierBasis<Scalar>& basis) {
    const auto& grid = basis.grid();
    if (samples.cols() != static_cast<Eigen::Index>(grid.size()))
        throw DataError("sample width does not match grid size");
    CoeffMatrix<Scalar> coeffs(samples.rows(), basis.size());
    std::vector<Scalar> row(grid.size());
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        for (Eigen::Index j = 0; j < samples.cols(); ++j) row[static_cast<std::size_t>(j)] = samples(i, j);
        coeffs.row(i) = project_curve<Scalar>(grid, row, basis.size(), i).transpose();
    }
    return CurveSeries<Scalar>(std::move(coeffs), basis);
}

/// L2[0,1] inner product; reduces to the coefficient dot product by orthonormality.
template <typename A, typename B>
typename A::Scalar inner_product(const Eigen::MatrixBase<A>& f, const Eigen::MatrixBase<B>& g) {
    if (f.size() != g.size()) throw DataError("inner product of curves in different bases");
    return f.dot(g);
}

template <typename A>
typename A::Scalar norm(const Eigen::MatrixBase<A>& f) {
    return f.norm();
}

/// Evaluates sum_l coeffs_l v_l(t) at each point.
template <typename Derived>
Curve<typename Derived::Scalar> evaluate(const Eigen::MatrixBase<Derived>& coeffs,
                                         std::span<const typename Derived::Scalar> points) {
    using Scalar = typename Derived::Scalar;
    const FourierBasis<Scalar> basis(static_cast<int>(coeffs.size()), 1);
    return basis.design(points) * coeffs;
}

/// Eigenpairs sorted by descending eigenvalue; each eigenvector's largest-magnitude entry is positive.
template <typename Scalar>
struct EigenSystem {
    Curve<Scalar> values;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;

    Eigen::Index size() const noexcept { return values.size(); }
    Scalar largest() const { return values(0); }
};

template <typename Derived>
EigenSystem<typename Derived::Scalar> eigen_decompose(const Eigen::MatrixBase<Derived>& kernel) {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (kernel.rows() != kernel.cols()) throw DataError("kernel matrix must be square");
    if (!kernel.allFinite()) throw NumericalError("kernel matrix has non-finite entries");
    const Matrix sym = (kernel + kernel.transpose()) / Scalar(2);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed to converge");

    const Eigen::Index d = sym.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto& raw = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return raw(a) > raw(b); });

    EigenSystem<Scalar> out{Curve<Scalar>(d), Matrix(d, d)};
    for (Eigen::Index k = 0; k < d; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.values(k) = raw(src);
        Curve<Scalar> v = solver.eigenvectors().col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < Scalar(0)) v = -v;
        out.vectors.col(k) = v;
    }
    return out;
}

template <typename Derived>
typename Derived::Scalar trace(const Eigen::MatrixBase<Derived>& kernel) {
    return kernel.trace();
}

}  // namespace funcbreak
