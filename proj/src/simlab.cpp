#include "funcbreak/simlab.hpp"

#include "funcbreak/dating.hpp"
#include "funcbreak/detect.hpp"
#include "funcbreak/fpca.hpp"
#include "funcbreak/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>

namespace funcbreak {

std::string_view to_string(Dependence dep) { return dep == Dependence::Iid ? "iid" : "far1"; }

Dependence parse_dependence(std::string_view name) {
    if (name == "iid") return Dependence::Iid;
    if (name == "far1" || name == "FAR1" || name == "FAR(1)") return Dependence::Far1;
    throw DataError("unknown dependence '" + std::string(name) + "'");
}

void DgpConfig::validate() const {
    if (setting < 1 || setting > 3) throw DataError("setting must be 1, 2 or 3");
    if (!(std::abs(kappa) < 1.0)) throw DataError("kappa must lie in (-1,1)");
    if (innovation == Innovation::StudentT && (df < 2 || df > 4)) throw DataError("df must be 2, 3 or 4");
    if (n < 10) throw DataError("n must be at least 10");
    if (dimension < 1) throw DataError("dimension must be positive");
    if (burnin < 0) throw DataError("burn-in must be non-negative");
}

Eigen::VectorXd sigma_vector(int setting, int dimension) {
    if (dimension < 1) throw DataError("dimension must be positive");
    Eigen::VectorXd s(dimension);
    for (int l = 1; l <= dimension; ++l) {
        switch (setting) {
            case 1: s(l - 1) = l <= 3 ? 1.0 : 0.0; break;
            case 2: s(l - 1) = std::pow(3.0, -l); break;
            case 3: s(l - 1) = 1.0 / l; break;
            default: throw DataError("unknown setting " + std::to_string(setting));
        }
    }
    return s;
}

std::vector<int> draw_permutation(int dimension, Rng& rng) {
    std::vector<int> perm(static_cast<std::size_t>(dimension));
    std::iota(perm.begin(), perm.end(), 0);
    // Fisher-Yates with an explicit uniform draw so the result is library independent.
    for (int i = dimension - 1; i > 0; --i) {
        const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return perm;
}

Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& canonical, std::span<const int> perm) {
    if (static_cast<Eigen::Index>(perm.size()) != canonical.cols()) throw DataError("permutation size mismatch");
    Eigen::MatrixXd out(canonical.rows(), canonical.cols());
    for (std::size_t l = 0; l < perm.size(); ++l) out.col(perm[l]) = canonical.col(static_cast<Eigen::Index>(l));
    return out;
}

namespace {

enum StreamTag : std::uint64_t { kPermStream = 0, kPsiStream = 1, kMainStream = 2, kBurnStream = 3 };

Eigen::MatrixXd draw_innovations(const DgpConfig& cfg, const Eigen::VectorXd& sigma, Eigen::Index rows, Rng& rng) {
    Eigen::MatrixXd z(rows, cfg.dimension);
    if (cfg.innovation == Innovation::Gaussian) {
        std::normal_distribution<double> dist;
        for (Eigen::Index i = 0; i < rows; ++i)
            for (int l = 0; l < cfg.dimension; ++l) z(i, l) = sigma(l) * dist(rng);
    } else {
        std::student_t_distribution<double> dist(cfg.df);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (int l = 0; l < cfg.dimension; ++l) z(i, l) = sigma(l) * dist(rng);
    }
    return z;
}

std::vector<int> permutation_for(const DgpConfig& cfg) {
    if (!cfg.permute) {
        std::vector<int> id(static_cast<std::size_t>(cfg.dimension));
        std::iota(id.begin(), id.end(), 0);
        return id;
    }
    Rng rng = make_stream(cfg.seed, {kPermStream});
    return draw_permutation(cfg.dimension, rng);
}

// Canonical-order FAR(1) path; kappa = 0 reproduces the main innovations exactly.
Eigen::MatrixXd far1_path(const DgpConfig& cfg, const Eigen::VectorXd& sigma, const Eigen::MatrixXd& psi, int burnin) {
    Rng main = make_stream(cfg.seed, {kMainStream});
    Rng burn = make_stream(cfg.seed, {kBurnStream});
    const Eigen::MatrixXd warm = draw_innovations(cfg, sigma, burnin, burn);
    const Eigen::MatrixXd zeta = draw_innovations(cfg, sigma, cfg.n, main);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(cfg.dimension);
    for (int i = 0; i < burnin; ++i) state = psi * state + warm.row(i).transpose();
    Eigen::MatrixXd eps(cfg.n, cfg.dimension);
    for (Eigen::Index i = 0; i < cfg.n; ++i) {
        state = psi * state + zeta.row(i).transpose();
        eps.row(i) = state.transpose();
    }
    return eps;
}

}  // namespace

Eigen::MatrixXd gen_innovations(const DgpConfig& config) {
    config.validate();
    const Eigen::VectorXd sigma = sigma_vector(config.setting, config.dimension);
    Rng main = make_stream(config.seed, {kMainStream});
    return permute_columns(draw_innovations(config, sigma, config.n, main), permutation_for(config));
}

Eigen::MatrixXd far1_operator(const Eigen::VectorXd& sigma, double kappa, Rng& rng) {
    if (!(std::abs(kappa) < 1.0)) throw DataError("kappa must lie in (-1,1)");
    const Eigen::Index d = sigma.size();
    std::normal_distribution<double> normal;
    Eigen::MatrixXd psi0(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) psi0(i, j) = sigma(i) * sigma(j) * normal(rng);
    const double top = Eigen::JacobiSVD<Eigen::MatrixXd>(psi0).singularValues()(0);
    if (!(top > 0.0)) throw NumericalError("FAR(1) operator draw is zero");
    return kappa * psi0 / top;
}

Eigen::MatrixXd gen_far1(const DgpConfig& config, double kappa, int burnin) {
    config.validate();
    if (burnin < 0) throw DataError("burn-in must be non-negative");
    const Eigen::VectorXd sigma = sigma_vector(config.setting, config.dimension);
    Rng psi_rng = make_stream(config.seed, {kPsiStream});
    const Eigen::MatrixXd psi = far1_operator(sigma, kappa, psi_rng);
    return permute_columns(far1_path(config, sigma, psi, burnin), permutation_for(config));
}

DgpDraw simulate_dgp(const DgpConfig& config) {
    config.validate();
    const Eigen::VectorXd sigma = sigma_vector(config.setting, config.dimension);
    DgpDraw draw;
    draw.permutation = permutation_for(config);
    if (config.dependence == Dependence::Iid) {
        Rng main = make_stream(config.seed, {kMainStream});
        draw.errors = permute_columns(draw_innovations(config, sigma, config.n, main), draw.permutation);
        draw.longrun_trace = sigma.squaredNorm();
    } else {
        Rng psi_rng = make_stream(config.seed, {kPsiStream});
        draw.psi = far1_operator(sigma, config.kappa, psi_rng);
        draw.errors = permute_columns(far1_path(config, sigma, draw.psi, config.burnin), draw.permutation);
        draw.longrun_trace = far1_longrun_trace(sigma, draw.psi);
    }
    return draw;
}

Eigen::VectorXd break_function(int m, double c, std::span<const int> perm, int dimension) {
    if (m < 1 || m > dimension) throw DataError("break dimension m must lie in 1..D");
    if (!(c >= 0.0)) throw DataError("break scale c must be non-negative");
    if (static_cast<int>(perm.size()) != dimension) throw DataError("permutation size mismatch");
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(dimension);
    const double v = std::sqrt(c / m);
    for (int l = 0; l < m; ++l) delta(perm[static_cast<std::size_t>(l)]) = v;
    return delta;
}

double snr_to_c(double snr, double theta, double trace) {
    if (!(theta > 0.0 && theta < 1.0)) throw DataError("theta must lie in (0,1)");
    if (!(trace > 0.0)) throw DataError("long-run trace must be positive");
    if (!(snr >= 0.0)) throw DataError("SNR must be non-negative");
    return snr * trace / (theta * (1.0 - theta));
}

double far1_longrun_trace(const Eigen::VectorXd& sigma, const Eigen::MatrixXd& psi) {
    const Eigen::Index d = sigma.size();
    if (psi.rows() != d || psi.cols() != d) throw DataError("operator shape does not match sigma");
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d) - psi;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw NumericalError("I - Psi is singular");
    const Eigen::MatrixXd inv = lu.inverse();
    return (inv * sigma.array().square().matrix().asDiagonal() * inv.transpose()).trace();
}

Eigen::MatrixXd insert_break(const Eigen::MatrixXd& curves, const Eigen::VectorXd& delta, Eigen::Index k_star) {
    if (k_star < 0 || k_star > curves.rows()) throw DataError("break date must lie in 0..n");
    if (delta.size() != curves.cols()) throw DataError("break function dimension mismatch");
    Eigen::MatrixXd out = curves;
    out.bottomRows(curves.rows() - k_star).rowwise() += delta.transpose();
    return out;
}

std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Size: return "size";
        case ExperimentKind::Power: return "power";
        case ExperimentKind::Dating: return "dating";
        case ExperimentKind::Coverage: return "coverage";
    }
    return "unknown";
}

ExperimentKind parse_experiment(std::string_view name) {
    if (name == "size") return ExperimentKind::Size;
    if (name == "power") return ExperimentKind::Power;
    if (name == "dating") return ExperimentKind::Dating;
    if (name == "coverage") return ExperimentKind::Coverage;
    throw DataError("unknown experiment '" + std::string(name) + "'");
}

std::string DetectorSpec::name() const {
    switch (kind) {
        case DetectorKind::FullyFunctional: return "FF";
        case DetectorKind::Aligned: return "Aligned";
        case DetectorKind::Fpca: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "fPCA%02d", static_cast<int>(std::lround(tve * 100.0)));
            return buf;
        }
    }
    return "unknown";
}

DetectorSpec parse_detector(std::string_view name) {
    if (name == "FF") return {DetectorKind::FullyFunctional, 0.0};
    if (name == "Aligned") return {DetectorKind::Aligned, 0.0};
    if (name.starts_with("fPCA") && name.size() > 4) {
        const std::string digits(name.substr(4));
        if (digits.find_first_not_of("0123456789") == std::string::npos && digits.size() <= 3) {
            const int pct = std::stoi(digits);
            if (pct >= 1 && pct <= 100) return {DetectorKind::Fpca, pct / 100.0};
        }
    }
    throw DataError("unknown detector '" + std::string(name) + "'");
}

std::vector<std::string> ExperimentSpec::problems() const {
    std::vector<std::string> out;
    auto add = [&](const std::string& s) { out.push_back(s); };
    if (settings.empty()) add("no settings given");
    for (int s : settings)
        if (s < 1 || s > 3) add("setting " + std::to_string(s) + " not in {1,2,3}");
    if (dependences.empty()) add("no dependence structures given");
    if (!(std::abs(kappa) < 1.0)) add("kappa " + std::to_string(kappa) + " not in (-1,1)");
    if (innovation == Innovation::StudentT && (df < 2 || df > 4)) add("df " + std::to_string(df) + " not in {2,3,4}");
    if (ns.empty()) add("no sample sizes given");
    for (auto n : ns)
        if (n < 10) add("n " + std::to_string(n) + " below 10");
    if (reps < 1) add("reps must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) add("alpha must lie in (0,1)");
    if (null_reps < 1) add("null reps must be at least 1");
    if (bridge_grid < 100) add("bridge grid must be at least 100");
    if (xi_reps < 1) add("xi reps must be at least 1");
    if (!(gamma > 0.0 && gamma < 0.5)) add("gamma must lie in (0, 1/2)");
    if (detectors.empty()) add("no detectors given");
    if (longrun.bandwidth == BandwidthKind::Adaptive && longrun.weight == WeightKind::FlatTop)
        add("adaptive bandwidth is not defined for the flat-top weight");
    for (const auto& d : detectors) {
        if (kind == ExperimentKind::Dating && d.kind == DetectorKind::Aligned)
            add("detector Aligned has no break date estimator");
        if (kind == ExperimentKind::Coverage && d.kind != DetectorKind::FullyFunctional)
            add("detector " + d.name() + " has no confidence interval");
    }
    if (kind != ExperimentKind::Size) {
        if (ms.empty()) add("no break dimensions m given");
        for (int m : ms)
            if (m < 1 || m > dimension) add("m " + std::to_string(m) + " not in 1..D");
        if (snrs.empty()) add("no SNR values given");
        for (double s : snrs) {
            if (!(s >= 0.0)) add("snr " + std::to_string(s) + " is negative");
            if (kind != ExperimentKind::Power && !(s > 0.0)) add("snr must be positive for " + std::string(to_string(kind)));
        }
        if (thetas.empty()) add("no break fractions given");
        for (double t : thetas)
            if (!(t > 0.0 && t < 1.0)) add("theta " + std::to_string(t) + " not in (0,1)");
        for (double t : thetas)
            for (auto n : ns) {
                const auto k = static_cast<Eigen::Index>(std::floor(t * static_cast<double>(n)));
                if (k < 1 || k > n - 1) add("theta " + std::to_string(t) + " gives no break inside n = " + std::to_string(n));
            }
    }
    return out;
}

namespace {

struct Outcome {
    bool ok = false;
    double value = 0.0;  // rejection indicator, dating error, or coverage indicator
    double width = 0.0;
    bool violation = false;
};

class XiCache {
public:
    XiCache(std::uint64_t seed, int reps) : seed_(seed), reps_(reps) {}

    XiSample sample(double theta, double sigma2) {
        if (sigma2 == 0.0) return simulate_xi(theta, 0.0, LimitProcessConfig::defaults(theta, 0.0, reps_, seed_));
        std::shared_ptr<const std::vector<double>> unit;
        {
            std::lock_guard lock(mutex_);
            auto it = cache_.find(theta);
            if (it != cache_.end()) unit = it->second;
        }
        if (!unit) {
            const std::uint64_t s = derive_seed(seed_, {std::bit_cast<std::uint64_t>(theta)});
            auto fresh = std::make_shared<const std::vector<double>>(
                simulate_xi(theta, 1.0, LimitProcessConfig::defaults(theta, 1.0, reps_, s)).draws);
            std::lock_guard lock(mutex_);
            unit = cache_.emplace(theta, fresh).first->second;
        }
        XiSample out;
        out.draws = *unit;
        for (double& d : out.draws) d *= sigma2;
        return out;
    }

private:
    std::uint64_t seed_;
    int reps_;
    std::mutex mutex_;
    std::map<double, std::shared_ptr<const std::vector<double>>> cache_;
};

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
    if (const auto p = spec.problems(); !p.empty()) {
        std::ostringstream msg;
        msg << "invalid experiment grid:";
        for (const auto& s : p) msg << "\n  - " << s;
        throw DataError(msg.str());
    }
    const NullLimitBank bank(spec.dimension, spec.null_reps, spec.bridge_grid, derive_seed(spec.seed, {0x6e756c6cULL}));
    XiCache xi_cache(derive_seed(spec.seed, {0x7869ULL}), spec.xi_reps);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(spec.dimension);
    auto unit_weights = [&](int d) { return std::span<const double>(ones.data(), static_cast<std::size_t>(d)); };

    std::vector<BreakSpec> breaks;
    if (spec.kind == ExperimentKind::Size) {
        breaks.push_back({0, 0.0, 0.0});
    } else {
        for (int m : spec.ms)
            for (double snr : spec.snrs)
                for (double theta : spec.thetas) breaks.push_back({m, snr, theta});
    }
    const std::size_t nb = breaks.size();
    const std::size_t nd = spec.detectors.size();

    std::vector<ResultRow> rows;
    for (int setting : spec.settings) {
        for (Dependence dep : spec.dependences) {
            for (Eigen::Index n : spec.ns) {
                const auto reps = static_cast<std::size_t>(spec.reps);
                std::vector<Outcome> outcomes(reps * nb * nd);
                parallel_for(reps, [&](std::size_t rep) {
                    DgpConfig cfg;
                    cfg.setting = setting;
                    cfg.dependence = dep;
                    cfg.kappa = spec.kappa;
                    cfg.innovation = spec.innovation;
                    cfg.df = spec.df;
                    cfg.n = n;
                    cfg.permute = spec.permute;
                    cfg.dimension = spec.dimension;
                    cfg.seed = derive_seed(spec.seed, {static_cast<std::uint64_t>(setting), static_cast<std::uint64_t>(dep),
                                                        static_cast<std::uint64_t>(n),
                                                        static_cast<std::uint64_t>(spec.innovation),
                                                        static_cast<std::uint64_t>(spec.df), rep});
                    const DgpDraw draw = simulate_dgp(cfg);
                    for (std::size_t b = 0; b < nb; ++b) {
                        const BreakSpec& brk = breaks[b];
                        Eigen::Index k_star = 0;
                        Eigen::MatrixXd x = draw.errors;
                        if (brk.snr > 0.0 && brk.theta > 0.0) {
                            k_star = static_cast<Eigen::Index>(std::floor(brk.theta * static_cast<double>(n)));
                            const double c = snr_to_c(brk.snr, brk.theta, draw.longrun_trace);
                            x = insert_break(x, break_function(brk.m, c, draw.permutation, spec.dimension), k_star);
                        }
                        std::optional<LongRunEstimate> lr;
                        auto longrun = [&]() -> const LongRunEstimate& {
                            if (!lr) lr = estimate_longrun(x, spec.longrun);
                            return *lr;
                        };
                        for (std::size_t d = 0; d < nd; ++d) {
                            Outcome& out = outcomes[(rep * nb + b) * nd + d];
                            const DetectorSpec& det = spec.detectors[d];
                            try {
                                switch (spec.kind) {
                                    case ExperimentKind::Size:
                                    case ExperimentKind::Power: {
                                        int exceed = 0;
                                        if (det.kind == DetectorKind::FullyFunctional) {
                                            const Eigen::VectorXd ev = clipped_eigenvalues(longrun().kernel);
                                            exceed = bank.exceedances(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size())),
                                                                      detector_stat(x));
                                        } else if (det.kind == DetectorKind::Fpca) {
                                            const auto eig = eigen_decompose(sample_cov_kernel(x));
                                            const int dim = tve_dimension(
                                                std::span<const double>(eig.values.data(), static_cast<std::size_t>(eig.values.size())), det.tve);
                                            exceed = bank.exceedances(unit_weights(dim), fpca_statistic(x, dim).stat);
                                        } else {
                                            exceed = bank.exceedances(unit_weights(1), aligned_statistic(x, longrun().kernel, spec.gamma).stat);
                                        }
                                        out.value = mc_p_value(exceed, spec.null_reps) <= spec.alpha ? 1.0 : 0.0;
                                        break;
                                    }
                                    case ExperimentKind::Dating: {
                                        Eigen::Index k = 0;
                                        if (det.kind == DetectorKind::FullyFunctional) {
                                            k = estimate_break_date(x);
                                        } else {
                                            const auto eig = eigen_decompose(sample_cov_kernel(x));
                                            const int dim = tve_dimension(
                                                std::span<const double>(eig.values.data(), static_cast<std::size_t>(eig.values.size())), det.tve);
                                            k = fpca_statistic(x, dim).k_tilde;
                                        }
                                        out.value = static_cast<double>(k - k_star);
                                        break;
                                    }
                                    case ExperimentKind::Coverage: {
                                        try {
                                            const auto rep_d = date_break_with(
                                                x, longrun().kernel, spec.alpha, spec.conservative,
                                                [&](double th, double s2) { return xi_cache.sample(th, s2); });
                                            const double ks = static_cast<double>(k_star);
                                            out.value = (rep_d.ci.lo <= ks && ks <= rep_d.ci.hi) ? 1.0 : 0.0;
                                            out.width = rep_d.ci.hi - rep_d.ci.lo;
                                        } catch (const BoundViolation&) {
                                            out.violation = true;
                                            throw;
                                        }
                                        break;
                                    }
                                }
                                out.ok = true;
                            } catch (const std::exception&) {
                                out.ok = false;
                            }
                        }
                    }
                });

                for (std::size_t b = 0; b < nb; ++b) {
                    for (std::size_t d = 0; d < nd; ++d) {
                        std::vector<double> values;
                        std::vector<double> widths;
                        int failed = 0;
                        int violations = 0;
                        for (std::size_t rep = 0; rep < reps; ++rep) {
                            const Outcome& o = outcomes[(rep * nb + b) * nd + d];
                            if (o.violation) ++violations;
                            if (!o.ok) {
                                ++failed;
                                continue;
                            }
                            values.push_back(o.value);
                            widths.push_back(o.width);
                        }
                        const BreakSpec& brk = breaks[b];
                        auto row = [&](const std::string& metric, double value, std::optional<double> se) {
                            rows.push_back({setting, std::string(to_string(dep)), n, brk.m, brk.snr, brk.theta,
                                            spec.detectors[d].name(), metric, value, se, spec.reps, spec.seed});
                        };
                        const double ok = static_cast<double>(values.size());
                        if (!values.empty()) {
                            switch (spec.kind) {
                                case ExperimentKind::Size:
                                case ExperimentKind::Power: {
                                    const double p = stats::mean(values);
                                    row("rejection_rate", p, std::sqrt(p * (1.0 - p) / ok));
                                    break;
                                }
                                case ExperimentKind::Dating: {
                                    std::vector<double> abs_err(values.size());
                                    std::transform(values.begin(), values.end(), abs_err.begin(), [](double v) { return std::abs(v); });
                                    row("bias", stats::mean(values), stats::stdev(values) / std::sqrt(ok));
                                    row("median_abs_error", stats::median(abs_err), std::nullopt);
                                    row("q25", stats::quantile(values, 0.25), std::nullopt);
                                    row("q75", stats::quantile(values, 0.75), std::nullopt);
                                    break;
                                }
                                case ExperimentKind::Coverage: {
                                    const double p = stats::mean(values);
                                    row("coverage", p, std::sqrt(p * (1.0 - p) / ok));
                                    row("median_width", stats::median(widths), std::nullopt);
                                    row("sigma2_bound_violations", violations, std::nullopt);
                                    break;
                                }
                            }
                        } else if (spec.kind == ExperimentKind::Coverage) {
                            row("sigma2_bound_violations", violations, std::nullopt);
                        }
                        if (failed > 0) row("failed", failed, std::nullopt);
                    }
                }
            }
        }
    }
    return rows;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << kResultCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.setting << ',' << r.dependence << ',' << r.n << ',' << r.m << ',' << format_number(r.snr) << ','
            << format_number(r.theta) << ',' << r.detector << ',' << r.metric << ',' << format_number(r.value) << ','
            << (r.stderr_value ? format_number(*r.stderr_value) : std::string()) << ',' << r.reps << ',' << r.seed
            << '\n';
    }
}

}  // namespace funcbreak
