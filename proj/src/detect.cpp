#include "funcbreak/detect.hpp"

#include "funcbreak/random.hpp"
#include "funcbreak/stats.hpp"

#include <algorithm>
#include <cmath>

namespace funcbreak {

namespace {

void check_null_args(int reps, int grid) {
    if (reps < 1) throw DataError("null simulation needs at least one replication");
    if (grid < 100) throw DataError("bridge grid must have at least 100 steps");
}

// Fills bridge(j), j = 0..grid, with one Brownian bridge path.
void bridge_path(Rng& rng, std::normal_distribution<double>& normal, int grid, std::vector<double>& bridge) {
    const double step = 1.0 / std::sqrt(static_cast<double>(grid));
    bridge[0] = 0.0;
    for (int j = 1; j <= grid; ++j) bridge[static_cast<std::size_t>(j)] = bridge[static_cast<std::size_t>(j) - 1] + step * normal(rng);
    const double end = bridge[static_cast<std::size_t>(grid)];
    for (int j = 1; j <= grid; ++j)
        bridge[static_cast<std::size_t>(j)] -= (static_cast<double>(j) / grid) * end;
    bridge[static_cast<std::size_t>(grid)] = 0.0;
}

std::map<double, double> critical_values_for(const std::vector<double>& sorted, double alpha) {
    std::map<double, double> out;
    for (double a : {0.01, 0.05, 0.10, alpha}) out[a] = stats::quantile_sorted(sorted, 1.0 - a);
    return out;
}

}  // namespace

NullLimitSample simulate_null_limit(std::span<const double> eigenvalues, int reps, int grid, std::uint64_t seed) {
    check_null_args(reps, grid);
    std::vector<double> lambda(eigenvalues.begin(), eigenvalues.end());
    for (double& l : lambda) l = std::max(0.0, l);
    NullLimitSample out;
    out.degenerate = std::all_of(lambda.begin(), lambda.end(), [](double l) { return l == 0.0; });
    out.draws.assign(static_cast<std::size_t>(reps), 0.0);
    if (out.degenerate) return out;

    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
        Rng rng = make_stream(seed, {r});
        std::normal_distribution<double> normal;
        std::vector<double> bridge(static_cast<std::size_t>(grid) + 1);
        std::vector<double> acc(static_cast<std::size_t>(grid) + 1, 0.0);
        for (double l : lambda) {
            bridge_path(rng, normal, grid, bridge);
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += l * (bridge[j] * bridge[j]);
        }
        out.draws[r] = *std::max_element(acc.begin(), acc.end());
    });
    std::sort(out.draws.begin(), out.draws.end());
    return out;
}

NullLimitBank::NullLimitBank(int dimension, int reps, int grid, std::uint64_t seed)
    : dimension_(dimension), reps_(reps), grid_(grid), seed_(seed) {
    check_null_args(reps, grid);
    if (dimension < 1) throw DataError("bridge bank dimension must be positive");
    squares_.resize(static_cast<std::size_t>(reps));
    maxima_.resize(reps, dimension);
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
        Rng rng = make_stream(seed, {r});
        std::normal_distribution<double> normal;
        std::vector<double> bridge(static_cast<std::size_t>(grid) + 1);
        auto& sq = squares_[r];
        // Interior points only; the bridge vanishes at both ends.
        sq.resize(grid - 1, dimension);
        for (int l = 0; l < dimension; ++l) {
            bridge_path(rng, normal, grid, bridge);
            float mx = 0.0f;
            for (int j = 1; j < grid; ++j) {
                const auto v = static_cast<float>(bridge[static_cast<std::size_t>(j)] * bridge[static_cast<std::size_t>(j)]);
                sq(j - 1, l) = v;
                mx = std::max(mx, v);
            }
            maxima_(static_cast<Eigen::Index>(r), l) = mx;
        }
    });
}

Eigen::VectorXf NullLimitBank::weights(std::span<const double> eigenvalues) const {
    if (static_cast<int>(eigenvalues.size()) > dimension_)
        throw DataError("more eigenvalues than the bridge bank dimension");
    Eigen::VectorXf w = Eigen::VectorXf::Zero(dimension_);
    for (std::size_t l = 0; l < eigenvalues.size(); ++l)
        w(static_cast<Eigen::Index>(l)) = static_cast<float>(std::max(0.0, eigenvalues[l]));
    return w;
}

double NullLimitBank::draw(int r, const Eigen::VectorXf& w) const {
    return std::max(0.0f, (squares_[static_cast<std::size_t>(r)] * w).maxCoeff());
}

NullLimitSample NullLimitBank::sample(std::span<const double> eigenvalues) const {
    const Eigen::VectorXf w = weights(eigenvalues);
    NullLimitSample out;
    out.degenerate = (w.array() == 0.0f).all();
    out.draws.assign(static_cast<std::size_t>(reps_), 0.0);
    if (out.degenerate) return out;
    for (int r = 0; r < reps_; ++r) out.draws[static_cast<std::size_t>(r)] = draw(r, w);
    std::sort(out.draws.begin(), out.draws.end());
    return out;
}

int NullLimitBank::exceedances(std::span<const double> eigenvalues, double threshold) const {
    const Eigen::VectorXf w = weights(eigenvalues);
    int count = 0;
    for (int r = 0; r < reps_; ++r) {
        const auto m = maxima_.row(r).transpose();
        // sup of the sum lies between the largest single term and the sum of per-bridge sups.
        if (static_cast<double>(m.dot(w)) < threshold) continue;
        if (static_cast<double>(m.cwiseProduct(w).maxCoeff()) >= threshold) {
            ++count;
            continue;
        }
        if (draw(r, w) >= threshold) ++count;
    }
    return count;
}

double mc_p_value(int exceed, int reps) {
    return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(reps) + 1.0);
}

Eigen::VectorXd clipped_eigenvalues(const KernelMatrix<double>& kernel) {
    return eigen_decompose(kernel).values.cwiseMax(0.0);
}

namespace {

DetectionReport prepare(const CoeffMatrix<double>& curves, double alpha, const LongRunConfig& longrun) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("alpha must lie in (0,1)");
    DetectionReport rep;
    rep.alpha = alpha;
    rep.longrun = longrun;
    const auto norms = cusum_norm_sq(curves);
    rep.k_hat = first_argmax(norms);
    rep.stat = norms.tail(curves.rows()).maxCoeff();
    const auto est = estimate_longrun(curves, longrun, rep.k_hat);
    rep.h = est.h;
    rep.adaptive_constant = est.adaptive_constant;
    rep.eigenvalues_used = clipped_eigenvalues(est.kernel);
    return rep;
}

void finish(DetectionReport& rep, const NullLimitSample& null) {
    rep.degenerate = null.degenerate;
    rep.critical_values = critical_values_for(null.draws, rep.alpha);
    const auto first_ge = std::lower_bound(null.draws.begin(), null.draws.end(), rep.stat);
    const int exceed = static_cast<int>(null.draws.end() - first_ge);
    rep.p_value = mc_p_value(exceed, rep.reps);
    rep.reject = rep.p_value <= rep.alpha;
}

}  // namespace

DetectionReport test(const CoeffMatrix<double>& curves, double alpha, const LongRunConfig& longrun, int reps,
                     std::uint64_t seed, int grid) {
    DetectionReport rep = prepare(curves, alpha, longrun);
    rep.reps = reps;
    rep.grid = grid;
    rep.seed = seed;
    const auto& ev = rep.eigenvalues_used;
    finish(rep, simulate_null_limit(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size())), reps, grid, seed));
    return rep;
}

DetectionReport test(const CoeffMatrix<double>& curves, double alpha, const LongRunConfig& longrun,
                     const NullLimitBank& bank) {
    DetectionReport rep = prepare(curves, alpha, longrun);
    rep.reps = bank.reps();
    rep.grid = bank.grid();
    rep.seed = bank.seed();
    const auto& ev = rep.eigenvalues_used;
    finish(rep, bank.sample(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size()))));
    return rep;
}

}  // namespace funcbreak
