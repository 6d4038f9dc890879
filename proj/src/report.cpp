#include "funcbreak/report.hpp"

#include "funcbreak/fpca.hpp"

#include <cmath>
#include <cstdio>

namespace funcbreak {

namespace {

enum SeedTag : std::uint64_t { kXiSeed = 1, kFpcaSeed = 2 };

double finite(double v, const char* field) {
    if (!std::isfinite(v)) throw NumericalError(std::string("report field '") + field + "' is not finite");
    return v;
}

std::string alpha_key(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", a);
    return buf;
}

FpcaSummary fpca_summary(const CoeffMatrix<double>& x, double tve, int max_d, const AnalysisOptions& options) {
    const auto eig = eigen_decompose(sample_cov_kernel(x));
    FpcaSummary out;
    out.tve = tve;
    out.d = tve_dimension(std::span<const double>(eig.values.data(), static_cast<std::size_t>(eig.values.size())), tve);
    const FpcaStatistic st = fpca_statistic(x, out.d);
    out.stat = st.stat;
    out.k_tilde = st.k_tilde;
    const std::vector<double> ones(static_cast<std::size_t>(out.d), 1.0);
    const auto null = simulate_null_limit(ones, options.reps, options.grid, derive_seed(options.seed, {kFpcaSeed}));
    const auto exceed = static_cast<int>(null.draws.end() - std::lower_bound(null.draws.begin(), null.draws.end(), st.stat));
    out.p_value = mc_p_value(exceed, options.reps);
    const double top = eig.values(0);
    for (int d = 1; d <= std::min<int>(max_d, static_cast<int>(eig.values.size())); ++d) {
        if (!(eig.values(d - 1) > 1e-12 * top)) break;
        out.k_tilde_by_d.push_back(fpca_statistic(x, d).k_tilde);
    }
    return out;
}

}  // namespace

AnalysisResult analyze(const CurveSeries<double>& series, const AnalysisOptions& options) {
    const auto& x = series.coeffs();
    AnalysisResult out;
    out.options = options;
    out.labels = series.labels();
    out.dimension = series.dimension();
    out.detection = test(x, options.alpha, options.longrun, options.reps, options.seed, options.grid);
    const auto delta = estimate_break_function(x, out.detection.k_hat);
    const LongRunEstimate lr = estimate_longrun(x, options.longrun, out.detection.k_hat);
    if (delta.squaredNorm() > 0.0) out.sigma2_hat = std::max(0.0, sigma2_hat(lr.kernel, delta));
    if (options.date) {
        DatingOptions dopt;
        dopt.alpha = options.alpha;
        dopt.longrun = options.longrun;
        dopt.xi_reps = options.xi_reps;
        dopt.seed = derive_seed(options.seed, {kXiSeed});
        dopt.conservative = options.conservative;
        out.dating = date_break(x, dopt);
    }
    if (options.fpca_tve) out.fpca = fpca_summary(x, *options.fpca_tve, options.fpca_max_dimension, options);
    return out;
}

std::string label_at(const std::vector<std::string>& labels, double position) {
    if (labels.empty()) throw DataError("no labels");
    const double n = static_cast<double>(labels.size());
    const double p = std::isfinite(position) ? std::clamp(position, 1.0, n) : (position > 0 ? n : 1.0);
    return labels[static_cast<std::size_t>(p) - 1];
}

nlohmann::ordered_json to_json(const AnalysisResult& r) {
    using json = nlohmann::ordered_json;
    const auto& det = r.detection;
    json doc;
    doc["stat"] = finite(det.stat, "stat");
    doc["p_value"] = finite(det.p_value, "p_value");
    json cv = json::object();
    for (const auto& [a, q] : det.critical_values) cv[alpha_key(a)] = finite(q, "critical_values");
    doc["critical_values"] = cv;
    doc["reject"] = det.reject;
    doc["k_hat"] = det.k_hat;
    doc["k_hat_label"] = label_at(r.labels, static_cast<double>(det.k_hat));
    doc["theta_hat"] = finite(static_cast<double>(det.k_hat) / static_cast<double>(r.labels.size()), "theta_hat");
    doc["sigma2_hat"] = r.sigma2_hat ? json(finite(*r.sigma2_hat, "sigma2_hat")) : json(nullptr);
    if (r.dating) {
        const auto& d = *r.dating;
        json ci;
        ci["lo"] = finite(d.ci.lo, "ci.lo");
        ci["hi"] = finite(d.ci.hi, "ci.hi");
        ci["lo_label"] = label_at(r.labels, std::floor(d.ci.lo));
        ci["hi_label"] = label_at(r.labels, std::ceil(d.ci.hi));
        ci["lo_clamped"] = finite(d.ci_clamped.lo, "ci.lo_clamped");
        ci["hi_clamped"] = finite(d.ci_clamped.hi, "ci.hi_clamped");
        doc["ci"] = ci;
        doc["lambda1"] = finite(d.lambda1, "lambda1");
        doc["sigma2_used"] = finite(d.sigma2_used, "sigma2_used");
        doc["break_norm_sq"] = finite(d.delta_hat.squaredNorm(), "break_norm_sq");
        json xq = json::object();
        for (const auto& [q, v] : d.xi_quantiles) xq[alpha_key(q)] = finite(v, "xi_quantiles");
        doc["xi_quantiles"] = xq;
    } else {
        doc["ci"] = nullptr;
    }
    if (r.fpca) {
        const auto& f = *r.fpca;
        json fp;
        fp["tve"] = f.tve;
        fp["d"] = f.d;
        fp["stat"] = finite(f.stat, "fpca.stat");
        fp["p_value"] = finite(f.p_value, "fpca.p_value");
        fp["k_tilde"] = f.k_tilde;
        fp["k_tilde_label"] = label_at(r.labels, static_cast<double>(f.k_tilde));
        json by_d = json::array();
        for (std::size_t i = 0; i < f.k_tilde_by_d.size(); ++i)
            by_d.push_back({{"d", i + 1},
                            {"k_tilde", f.k_tilde_by_d[i]},
                            {"label", label_at(r.labels, static_cast<double>(f.k_tilde_by_d[i]))}});
        fp["k_tilde_by_d"] = by_d;
        doc["fpca"] = fp;
    }
    const auto& o = r.options;
    json cfg;
    cfg["n"] = r.labels.size();
    cfg["D"] = r.dimension;
    cfg["alpha"] = o.alpha;
    cfg["weight"] = std::string(to_string(o.longrun.weight));
    cfg["bandwidth"] = std::string(to_string(o.longrun.bandwidth));
    cfg["h"] = finite(det.h, "config.h");
    cfg["adaptive_constant"] = std::isfinite(det.adaptive_constant) ? json(det.adaptive_constant) : json(nullptr);
    cfg["R"] = o.reps;
    cfg["G"] = o.grid;
    cfg["seed"] = o.seed;
    cfg["conservative"] = o.conservative;
    cfg["xi_reps"] = o.date ? json(o.xi_reps) : json(nullptr);
    cfg["fpca_tve"] = o.fpca_tve ? json(*o.fpca_tve) : json(nullptr);
    cfg["degenerate"] = det.degenerate;
    doc["config"] = cfg;
    return doc;
}

}  // namespace funcbreak
