#include "funcbreak/longrun.hpp"

#include <cmath>
#include <limits>

namespace funcbreak {

WeightFunction weight_function(WeightKind kind) {
    switch (kind) {
        case WeightKind::Bartlett:
            return {kind, 1.0, 1.0, 1.0, 2.0 / 3.0};
        case WeightKind::Parzen:
            return {kind, 2.0, 6.0, 1.0, 151.0 / 280.0};
        case WeightKind::FlatTop:
            return {kind, 2.0, std::numeric_limits<double>::quiet_NaN(), 1.0, 4.0 / 3.0};
    }
    throw DataError("unknown weight function");
}

double weight(WeightKind kind, double x) {
    if (!std::isfinite(x)) throw DataError("weight argument must be finite");
    const double a = std::abs(x);
    switch (kind) {
        case WeightKind::Bartlett:
            return a <= 1.0 ? 1.0 - a : 0.0;
        case WeightKind::Parzen:
            if (a <= 0.5) return 1.0 - 6.0 * a * a + 6.0 * a * a * a;
            if (a <= 1.0) return 2.0 * (1.0 - a) * (1.0 - a) * (1.0 - a);
            return 0.0;
        case WeightKind::FlatTop:
            if (a <= 0.5) return 1.0;
            if (a <= 1.0) return 2.0 * (1.0 - a);
            return 0.0;
    }
    throw DataError("unknown weight function");
}

std::string_view to_string(WeightKind kind) {
    switch (kind) {
        case WeightKind::Bartlett: return "bartlett";
        case WeightKind::Parzen: return "parzen";
        case WeightKind::FlatTop: return "flattop";
    }
    return "unknown";
}

WeightKind parse_weight(std::string_view name) {
    if (name == "bartlett") return WeightKind::Bartlett;
    if (name == "parzen") return WeightKind::Parzen;
    if (name == "flattop" || name == "flat-top") return WeightKind::FlatTop;
    throw DataError("unknown weight function '" + std::string(name) + "'");
}

std::string_view to_string(BandwidthKind kind) {
    switch (kind) {
        case BandwidthKind::CubeRoot: return "n13";
        case BandwidthKind::FourthRoot: return "n14";
        case BandwidthKind::FifthRoot: return "n15";
        case BandwidthKind::Adaptive: return "adaptive";
    }
    return "unknown";
}

BandwidthKind parse_bandwidth(std::string_view name) {
    if (name == "n13") return BandwidthKind::CubeRoot;
    if (name == "n14") return BandwidthKind::FourthRoot;
    if (name == "n15") return BandwidthKind::FifthRoot;
    if (name == "adaptive") return BandwidthKind::Adaptive;
    throw DataError("unknown bandwidth rule '" + std::string(name) + "'");
}

double bandwidth(BandwidthKind rule, Eigen::Index n) {
    if (n < 4) throw DataError("bandwidth rules need n >= 4");
    const double nn = static_cast<double>(n);
    switch (rule) {
        case BandwidthKind::CubeRoot: return std::cbrt(nn);
        case BandwidthKind::FourthRoot: return std::sqrt(std::sqrt(nn));
        case BandwidthKind::FifthRoot: return std::pow(nn, 0.2);
        case BandwidthKind::Adaptive: break;
    }
    throw DataError("adaptive bandwidth needs the series data");
}

LongRunEstimate estimate_longrun(const CoeffMatrix<double>& curves, const LongRunConfig& config) {
    return estimate_longrun(curves, config, estimate_break_date(curves));
}

LongRunEstimate estimate_longrun(const CoeffMatrix<double>& curves, const LongRunConfig& config, Eigen::Index split) {
    double h = 0.0;
    double m = std::numeric_limits<double>::quiet_NaN();
    if (config.bandwidth == BandwidthKind::Adaptive) {
        const auto ab = adaptive_bandwidth(curves, config.weight, split);
        h = ab.h;
        m = ab.constant;
    } else {
        h = std::max(1.0, bandwidth(config.bandwidth, curves.rows()));
    }
    return {longrun_kernel(curves, config.weight, h, split), h, m, split};
}

}  // namespace funcbreak
