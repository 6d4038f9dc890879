#include "funcbreak/dating.hpp"

#include "funcbreak/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace funcbreak {

LimitProcessConfig LimitProcessConfig::defaults(double theta, double sigma2, int reps, std::uint64_t seed) {
    const double edge = std::min(theta, 1.0 - theta);
    const double l = sigma2 > 0.0 ? 50.0 * sigma2 / (edge * edge) : 1.0;
    return {l, l / 5000.0, reps, seed};
}

void LimitProcessConfig::validate() const {
    if (!(half_width > 0.0)) throw DataError("limit process half-width must be positive");
    if (!(step > 0.0) || step > half_width / 100.0) throw DataError("limit process step must lie in (0, L/100]");
    if (reps < 1) throw DataError("limit process needs at least one replication");
}

XiSample simulate_xi(double theta, double sigma2, const LimitProcessConfig& config) {
    if (!(theta > 0.0 && theta < 1.0)) throw DataError("theta must lie in (0,1)");
    if (!(sigma2 >= 0.0)) throw DataError("sigma^2 must be non-negative");
    if (config.reps < 1) throw DataError("limit process needs at least one replication");
    XiSample out;
    out.draws.assign(static_cast<std::size_t>(config.reps), 0.0);
    if (sigma2 == 0.0) {
        out.degenerate = true;
        return out;
    }
    config.validate();
    const auto steps = static_cast<long>(std::llround(config.half_width / config.step));
    const double dx = config.step;
    const double scale = std::sqrt(sigma2) * std::sqrt(dx);
    parallel_for(out.draws.size(), [&](std::size_t r) {
        Rng rng = make_stream(config.seed, {r});
        std::normal_distribution<double> normal;
        // Left side: leftmost maximizer wins ties, so take >= while walking outward.
        double w = 0.0, left_best = -INFINITY;
        long left_arg = 0;
        for (long j = 1; j <= steps; ++j) {
            w += scale * normal(rng);
            const double q = -(1.0 - theta) * dx * static_cast<double>(j) + w;
            if (q >= left_best) {
                left_best = q;
                left_arg = j;
            }
        }
        w = 0.0;
        double right_best = -INFINITY;
        long right_arg = 0;
        for (long j = 1; j <= steps; ++j) {
            w += scale * normal(rng);
            const double q = -theta * dx * static_cast<double>(j) + w;
            if (q > right_best) {
                right_best = q;
                right_arg = j;
            }
        }
        double x = 0.0;
        if (left_best >= std::max(0.0, right_best)) x = -dx * static_cast<double>(left_arg);
        else if (right_best > 0.0) x = dx * static_cast<double>(right_arg);
        out.draws[r] = x;
    });
    std::sort(out.draws.begin(), out.draws.end());
    return out;
}

XiSample scaled_xi_sample(double theta, double sigma2, int reps, std::uint64_t seed) {
    if (!(sigma2 >= 0.0)) throw DataError("sigma^2 must be non-negative");
    if (sigma2 == 0.0) return simulate_xi(theta, 0.0, LimitProcessConfig::defaults(theta, 0.0, reps, seed));
    XiSample unit = simulate_xi(theta, 1.0, LimitProcessConfig::defaults(theta, 1.0, reps, seed));
    for (double& d : unit.draws) d *= sigma2;
    return unit;
}

Interval confidence_interval(Eigen::Index k_hat, const Eigen::VectorXd& delta_hat, std::span<const double> xi_sorted,
                             double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("alpha must lie in (0,1)");
    const double nsq = delta_hat.squaredNorm();
    if (!(nsq > 0.0)) throw NumericalError("break function estimate is zero");
    const double k = static_cast<double>(k_hat);
    return {k - stats::quantile_sorted(xi_sorted, 1.0 - alpha / 2.0) / nsq,
            k - stats::quantile_sorted(xi_sorted, alpha / 2.0) / nsq};
}

std::vector<double> no_break_argmax_sample(std::span<const double> eigenvalues, int reps, int grid, std::uint64_t seed) {
    if (reps < 1) throw DataError("argmax simulation needs at least one replication");
    if (grid < 100) throw DataError("bridge grid must have at least 100 steps");
    std::vector<double> lambda(eigenvalues.begin(), eigenvalues.end());
    for (double& l : lambda) l = std::max(0.0, l);
    if (std::all_of(lambda.begin(), lambda.end(), [](double l) { return l == 0.0; }))
        throw NumericalError("argmax law undefined for an all-zero spectrum");
    std::vector<double> out(static_cast<std::size_t>(reps));
    parallel_for(out.size(), [&](std::size_t r) {
        Rng rng = make_stream(seed, {r});
        std::normal_distribution<double> normal;
        const double step = 1.0 / std::sqrt(static_cast<double>(grid));
        std::vector<double> w(static_cast<std::size_t>(grid) + 1);
        std::vector<double> acc(static_cast<std::size_t>(grid) + 1, 0.0);
        for (double l : lambda) {
            w[0] = 0.0;
            for (int j = 1; j <= grid; ++j) w[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(j) - 1] + step * normal(rng);
            const double end = w.back();
            for (int j = 0; j <= grid; ++j) {
                const double b = w[static_cast<std::size_t>(j)] - (static_cast<double>(j) / grid) * end;
                acc[static_cast<std::size_t>(j)] += l * (b * b);
            }
        }
        acc.front() = acc.back() = 0.0;
        const auto it = std::max_element(acc.begin(), acc.end());
        out[r] = static_cast<double>(it - acc.begin()) / grid;
    });
    return out;
}

std::vector<int> simulate_fixed_break_limit(const Eigen::VectorXd& delta, double theta, const ErrorGenerator& errors,
                                            int window, int reps, std::uint64_t seed) {
    if (window < 1) throw DataError("window must be at least 1");
    if (!(theta > 0.0 && theta < 1.0)) throw DataError("theta must lie in (0,1)");
    if (reps < 1) throw DataError("limit simulation needs at least one replication");
    const double nsq = delta.squaredNorm();
    if (!(nsq > 0.0)) throw DataError("break function must be non-zero");
    std::vector<int> out(static_cast<std::size_t>(reps));
    parallel_for(out.size(), [&](std::size_t r) {
        Rng rng = make_stream(seed, {r});
        // Rows 0..2K-1 are e_{-K+1}, ..., e_0, e_1, ..., e_K.
        const Eigen::MatrixXd e = errors(rng, 2 * static_cast<Eigen::Index>(window));
        if (e.rows() != 2 * window || e.cols() != delta.size())
            throw DataError("error generator returned the wrong shape");
        const Eigen::VectorXd proj = e * delta;
        std::vector<double> p(2 * static_cast<std::size_t>(window) + 1, 0.0);  // p[K + k] = P(k)
        double s = 0.0;
        for (int j = 1; j <= window; ++j) {
            s += proj(window - j);
            p[static_cast<std::size_t>(window - j)] = -(1.0 - theta) * nsq * j + s;
        }
        s = 0.0;
        for (int j = 1; j <= window; ++j) {
            s += proj(window + j - 1);
            p[static_cast<std::size_t>(window + j)] = -theta * nsq * j + s;
        }
        const auto it = std::max_element(p.begin(), p.end());
        out[r] = static_cast<int>(it - p.begin()) - window;
    });
    return out;
}

DatingReport date_break_with(const CoeffMatrix<double>& curves, const KernelMatrix<double>& longrun_kernel,
                             double alpha, bool conservative,
                             const std::function<XiSample(double, double)>& xi_sampler) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("alpha must lie in (0,1)");
    DatingReport rep;
    rep.n = curves.rows();
    rep.k_hat = estimate_break_date(curves);
    rep.theta_hat = static_cast<double>(rep.k_hat) / static_cast<double>(rep.n);
    rep.delta_hat = estimate_break_function(curves, rep.k_hat);
    rep.sigma2_hat = std::max(0.0, sigma2_hat(longrun_kernel, rep.delta_hat));
    rep.lambda1 = eigen_decompose(longrun_kernel).largest();
    if (rep.sigma2_hat > rep.lambda1 + 1e-10 * std::max(1.0, std::abs(rep.lambda1)))
        throw BoundViolation("sigma^2 estimate " + std::to_string(rep.sigma2_hat) +
                             " exceeds the leading long-run eigenvalue " + std::to_string(rep.lambda1));
    rep.conservative = conservative;
    rep.sigma2_used = conservative ? std::max(0.0, rep.lambda1) : rep.sigma2_hat;
    const XiSample xi = xi_sampler(rep.theta_hat, rep.sigma2_used);
    rep.degenerate = xi.degenerate;
    for (double q : {alpha / 2.0, 0.025, 0.05, 0.5, 0.95, 0.975, 1.0 - alpha / 2.0})
        rep.xi_quantiles[q] = stats::quantile_sorted(xi.draws, q);
    rep.ci = confidence_interval(rep.k_hat, rep.delta_hat, xi.draws, alpha);
    const double n = static_cast<double>(rep.n);
    rep.ci_clamped = {std::clamp(rep.ci.lo, 1.0, n), std::clamp(rep.ci.hi, 1.0, n)};
    return rep;
}

DatingReport date_break(const CoeffMatrix<double>& curves, const DatingOptions& options) {
    const auto est = estimate_longrun(curves, options.longrun);
    auto rep = date_break_with(curves, est.kernel, options.alpha, options.conservative,
                               [&](double theta, double sigma2) {
                                   return scaled_xi_sample(theta, sigma2, options.xi_reps, options.seed);
                               });
    rep.h = est.h;
    return rep;
}

}  // namespace funcbreak
