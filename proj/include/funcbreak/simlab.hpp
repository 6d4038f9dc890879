#pragma once

#include "funcbreak/fda.hpp"
#include "funcbreak/longrun.hpp"
#include "funcbreak/random.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace funcbreak {

enum class Dependence { Iid, Far1 };
enum class Innovation { Gaussian, StudentT };

std::string_view to_string(Dependence dep);
Dependence parse_dependence(std::string_view name);

struct DgpConfig {
    int setting = 1;
    Dependence dependence = Dependence::Iid;
    double kappa = 0.5;
    Innovation innovation = Innovation::Gaussian;
    int df = 3;
    Eigen::Index n = 100;
    std::uint64_t seed = 0;
    bool permute = true;
    int dimension = kDefaultBasisSize;
    int burnin = 100;

    void validate() const;
};

struct BreakSpec {
    int m = 1;
    double snr = 0.0;
    double theta = 0.5;
};

/// Coefficient standard deviations: (1,1,1,0,...), (3^{-l}), or (1/l).
Eigen::VectorXd sigma_vector(int setting, int dimension = kDefaultBasisSize);

/// Uniform random permutation of 0..dimension-1.
std::vector<int> draw_permutation(int dimension, Rng& rng);

/// Moves column l of a canonical-order matrix to column perm[l].
Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& canonical, std::span<const int> perm);

/// sigma_l * Z with Z standard normal or Student-t(df), optionally with permuted basis indices.
Eigen::MatrixXd gen_innovations(const DgpConfig& config);

/// kappa * Psi0 with Psi0 entries N(0, (sigma_i sigma_j)^2) rescaled to unit spectral norm.
Eigen::MatrixXd far1_operator(const Eigen::VectorXd& sigma, double kappa, Rng& rng);

/// eps_i = Psi eps_{i-1} + zeta_i after discarding burnin curves. With kappa = 0 this equals
/// gen_innovations(config).
Eigen::MatrixXd gen_far1(const DgpConfig& config, double kappa, int burnin = 100);

/// sqrt(c / m) sum_{l <= m} v_{perm(l)}.
Eigen::VectorXd break_function(int m, double c, std::span<const int> perm, int dimension = kDefaultBasisSize);

/// c = snr * trace / (theta (1 - theta)).
double snr_to_c(double snr, double theta, double trace);

/// tr((I - Psi)^{-1} diag(sigma^2) (I - Psi^T)^{-1}).
double far1_longrun_trace(const Eigen::VectorXd& sigma, const Eigen::MatrixXd& psi);

/// Adds delta to curves k*+1..n (1-based).
Eigen::MatrixXd insert_break(const Eigen::MatrixXd& curves, const Eigen::VectorXd& delta, Eigen::Index k_star);

/// Everything one replication needs: the error series, its permutation and analytic long-run trace.
struct DgpDraw {
    Eigen::MatrixXd errors;
    std::vector<int> permutation;
    Eigen::MatrixXd psi;  // empty for iid
    double longrun_trace = 0.0;
};

DgpDraw simulate_dgp(const DgpConfig& config);

enum class ExperimentKind { Size, Power, Dating, Coverage };
std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment(std::string_view name);

enum class DetectorKind { FullyFunctional, Fpca, Aligned };

struct DetectorSpec {
    DetectorKind kind = DetectorKind::FullyFunctional;
    double tve = 0.0;

    std::string name() const;
};

/// "FF", "fPCA85" (any two-digit TVE level), "Aligned".
DetectorSpec parse_detector(std::string_view name);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Size;
    std::vector<int> settings{1, 2, 3};
    std::vector<Dependence> dependences{Dependence::Iid, Dependence::Far1};
    double kappa = 0.5;
    Innovation innovation = Innovation::Gaussian;
    int df = 3;
    std::vector<Eigen::Index> ns{50, 100};
    std::vector<int> ms{1, 5, 20};
    std::vector<double> snrs{0.0, 0.1, 0.2, 0.3, 0.5, 1.0, 1.5};
    std::vector<double> thetas{0.5};
    std::vector<DetectorSpec> detectors{{DetectorKind::FullyFunctional, 0.0},
                                        {DetectorKind::Fpca, 0.85},
                                        {DetectorKind::Fpca, 0.90},
                                        {DetectorKind::Fpca, 0.95},
                                        {DetectorKind::Aligned, 0.0}};
    int reps = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    bool permute = true;
    bool conservative = false;
    LongRunConfig longrun;
    int null_reps = 1000;
    int bridge_grid = 1000;
    int xi_reps = 2000;
    int dimension = kDefaultBasisSize;
    double gamma = 0.25;

    /// Every invalid grid value, in one list; empty when the spec is runnable.
    std::vector<std::string> problems() const;
};

struct ResultRow {
    int setting;
    std::string dependence;
    Eigen::Index n;
    int m;
    double snr;
    double theta;
    std::string detector;
    std::string metric;
    double value;
    std::optional<double> stderr_value;
    int reps;
    std::uint64_t seed;
};

/// Runs the grid. Cells are keyed by (setting, dependence, n, m, snr, theta, detector); each replication's
/// errors are seeded from (seed, setting, dependence, n, rep) only, so every break configuration of a
/// replication shares one noise path and SNR = 0 reproduces the size cell.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

inline constexpr const char* kResultCsvHeader = "setting,dependence,n,m,snr,theta,detector,metric,value,stderr,reps,seed";

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace funcbreak
