#pragma once

#include "funcbreak/dating.hpp"
#include "funcbreak/detect.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace funcbreak {

struct AnalysisOptions {
    double alpha = 0.05;
    LongRunConfig longrun;
    int reps = kDefaultNullReps;
    int grid = kDefaultBridgeGrid;
    std::uint64_t seed = 1;
    bool date = false;  // also build the confidence interval
    bool conservative = false;
    int xi_reps = kDefaultXiReps;
    std::optional<double> fpca_tve;  // run the fPCA baseline alongside
    int fpca_max_dimension = 10;
};

struct FpcaSummary {
    double tve = 0.0;
    int d = 1;
    Eigen::Index k_tilde = 1;
    double stat = 0.0;
    double p_value = 1.0;
    std::vector<Eigen::Index> k_tilde_by_d;  // d = 1, 2, ...
};

struct AnalysisResult {
    DetectionReport detection;
    std::optional<double> sigma2_hat;  // absent when the break estimate is zero
    std::optional<DatingReport> dating;
    std::optional<FpcaSummary> fpca;
    std::vector<std::string> labels;
    int dimension = 0;
    AnalysisOptions options;
};

/// The fully functional test, the variance along the estimated break and, when requested, the
/// confidence interval and the fPCA baseline.
AnalysisResult analyze(const CurveSeries<double>& series, const AnalysisOptions& options);

/// Label of the curve at a 1-based position after clamping into [1, n].
std::string label_at(const std::vector<std::string>& labels, double position);

/// Report document. Throws NumericalError if any number would be non-finite.
nlohmann::ordered_json to_json(const AnalysisResult& result);

}  // namespace funcbreak
