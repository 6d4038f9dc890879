#include "funcbreak/cusum.hpp"
#include "funcbreak/detect.hpp"
#include "funcbreak/simlab.hpp"
#include "funcbreak/stats.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

using namespace funcbreak;

namespace {

DgpConfig config(int setting, Eigen::Index n, std::uint64_t seed) {
    DgpConfig cfg;
    cfg.setting = setting;
    cfg.n = n;
    cfg.seed = seed;
    return cfg;
}

ExperimentSpec small_spec(ExperimentKind kind) {
    ExperimentSpec s;
    s.kind = kind;
    s.settings = {2};
    s.dependences = {Dependence::Iid};
    s.ns = {50};
    s.ms = {1};
    s.snrs = {kind == ExperimentKind::Power ? 0.0 : 1.0};
    s.detectors = {parse_detector("FF")};
    s.reps = 40;
    s.null_reps = 200;
    s.bridge_grid = 200;
    s.xi_reps = 300;
    s.seed = 5;
    return s;
}

}  // namespace

TEST(SigmaVector, Settings) {
    const auto s1 = sigma_vector(1);
    EXPECT_EQ(s1.head(3), Eigen::Vector3d::Ones());
    EXPECT_EQ(s1.tail(18).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_DOUBLE_EQ(sigma_vector(2)(0), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(sigma_vector(2)(3), 1.0 / 81.0);
    EXPECT_DOUBLE_EQ(sigma_vector(3)(4), 0.2);
    EXPECT_EQ(sigma_vector(3, 5).size(), 5);
    EXPECT_THROW(sigma_vector(4), DataError);
}

TEST(Permutation, IsBijectionAndMovesColumns) {
    Rng rng(3);
    const auto perm = draw_permutation(21, rng);
    EXPECT_EQ(std::set<int>(perm.begin(), perm.end()).size(), 21u);
    const Eigen::MatrixXd canon = testsupport::gaussian_matrix(4, 21, 1);
    const auto moved = permute_columns(canon, perm);
    for (int l = 0; l < 21; ++l) EXPECT_EQ(moved.col(perm[static_cast<std::size_t>(l)]), canon.col(l));
}

TEST(Innovations, SettingOneLeavesEighteenColumnsZero) {
    const auto x = gen_innovations(config(1, 200, 4));
    int zero_cols = 0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) zero_cols += x.col(c).cwiseAbs().maxCoeff() == 0.0 ? 1 : 0;
    EXPECT_EQ(zero_cols, 18);
}

TEST(Innovations, ReproducibleFromSeed) {
    EXPECT_EQ(gen_innovations(config(3, 60, 9)), gen_innovations(config(3, 60, 9)));
    EXPECT_NE(gen_innovations(config(3, 60, 9)), gen_innovations(config(3, 60, 10)));
}

TEST(Innovations, ColumnScalesMatchSigma) {
    DgpConfig cfg = config(3, 10000, 11);
    cfg.permute = false;
    const auto x = gen_innovations(cfg);
    const auto sigma = sigma_vector(3);
    for (Eigen::Index l : {0, 1, 4, 20}) {
        const std::vector<double> col(x.col(l).data(), x.col(l).data() + x.rows());
        EXPECT_NEAR(stats::stdev(col) / sigma(l), 1.0, 0.05) << l;
    }
}

TEST(Innovations, StudentTScaledBySigma) {
    DgpConfig cfg = config(3, 20000, 12);
    cfg.permute = false;
    cfg.innovation = Innovation::StudentT;
    cfg.df = 4;
    const auto x = gen_innovations(cfg);
    // Var t_4 = 2.
    const std::vector<double> col(x.col(1).data(), x.col(1).data() + x.rows());
    EXPECT_NEAR(stats::stdev(col) / (0.5 * std::sqrt(2.0)), 1.0, 0.08);
    cfg.df = 5;
    EXPECT_THROW(gen_innovations(cfg), DataError);
}

TEST(Far1, ZeroKappaReproducesInnovations) {
    const auto cfg = config(2, 80, 13);
    EXPECT_EQ(gen_far1(cfg, 0.0), gen_innovations(cfg));
}

TEST(Far1, OperatorHasRequestedNorm) {
    Rng rng(14);
    const auto psi = far1_operator(sigma_vector(3), 0.5, rng);
    EXPECT_NEAR(Eigen::JacobiSVD<Eigen::MatrixXd>(psi).singularValues()(0), 0.5, 1e-12);
    EXPECT_THROW(far1_operator(sigma_vector(3), 1.0, rng), DataError);
}

TEST(Far1, LagOneRegressionRecoversOperator) {
    DgpConfig cfg = config(1, 20000, 15);
    cfg.dependence = Dependence::Far1;
    cfg.permute = false;
    const auto draw = simulate_dgp(cfg);
    const Eigen::MatrixXd e = draw.errors.leftCols(3);
    const Eigen::Index n = e.rows();
    const Eigen::MatrixXd g0 = e.topRows(n - 1).transpose() * e.topRows(n - 1) / static_cast<double>(n - 1);
    const Eigen::MatrixXd g1 = e.bottomRows(n - 1).transpose() * e.topRows(n - 1) / static_cast<double>(n - 1);
    const Eigen::MatrixXd psi_hat = g1 * g0.inverse();
    const Eigen::MatrixXd psi = draw.psi.topLeftCorner(3, 3);
    EXPECT_LT((psi_hat - psi).norm() / psi.norm(), 0.1);
    EXPECT_EQ(draw.psi.bottomRightCorner(18, 18).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Far1, HalfSampleMeansAgree) {
    // Half-sample means of a stationary path differ by less than 4 standard errors.
    DgpConfig cfg = config(3, 20000, 16);
    cfg.dependence = Dependence::Far1;
    const auto draw = simulate_dgp(cfg);
    const Eigen::RowVectorXd diff = draw.errors.topRows(10000).colwise().mean() - draw.errors.bottomRows(10000).colwise().mean();
    // Each half mean has covariance C / 10000, so the difference has trace 2 tr(C) / 10000.
    const double se = std::sqrt(2.0 * draw.longrun_trace / 10000.0);
    EXPECT_LT(diff.norm(), 4.0 * se);
}

TEST(Far1, LongRunTraceExamples) {
    const Eigen::VectorXd sigma = sigma_vector(3);
    EXPECT_NEAR(far1_longrun_trace(sigma, Eigen::MatrixXd::Zero(21, 21)), sigma.squaredNorm(), 1e-14);
    EXPECT_NEAR(far1_longrun_trace(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Constant(1, 1, 0.5)), 4.0, 1e-14);
    // Diagonal operator: sum sigma_l^2 / (1 - psi_l)^2.
    Eigen::VectorXd s(2);
    s << 1.0, 2.0;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2, 2);
    p(0, 0) = -0.5;
    p(1, 1) = 0.75;
    EXPECT_NEAR(far1_longrun_trace(s, p), 1.0 / 2.25 + 4.0 / 0.0625, 1e-12);
}

TEST(Far1, LongRunTraceMatchesLargeSampleEstimate) {
    DgpConfig cfg = config(3, 50000, 17);
    cfg.dependence = Dependence::Far1;
    const auto draw = simulate_dgp(cfg);
    const auto est = estimate_longrun(draw.errors, {WeightKind::Bartlett, BandwidthKind::CubeRoot}, cfg.n / 2);
    EXPECT_NEAR(est.kernel.trace() / draw.longrun_trace, 1.0, 0.05);
}

TEST(Break, FunctionNormAndSupport) {
    std::vector<int> perm(21);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    const auto d = break_function(5, 2.0, perm);
    EXPECT_NEAR(d.squaredNorm(), 2.0, 1e-14);
    EXPECT_EQ((d.array() != 0.0).count(), 5);
    EXPECT_GT(d(20), 0.0);
    EXPECT_EQ(d(0), 0.0);
    EXPECT_THROW(break_function(22, 1.0, perm), DataError);
}

TEST(Break, SnrToScale) {
    EXPECT_DOUBLE_EQ(snr_to_c(1.0, 0.5, 3.0), 12.0);
    EXPECT_DOUBLE_EQ(snr_to_c(0.0, 0.3, 1.0), 0.0);
    EXPECT_THROW(snr_to_c(1.0, 1.0, 1.0), DataError);
}

TEST(Break, InsertedAfterBreakDate) {
    const Eigen::MatrixXd x = testsupport::gaussian_matrix(10, 3, 18);
    const Eigen::VectorXd d = Eigen::Vector3d(1.0, 2.0, 3.0);
    const auto y = insert_break(x, d, 4);
    EXPECT_EQ(y.topRows(4), x.topRows(4));
    EXPECT_LT((y.bottomRows(6).rowwise() - d.transpose() - x.bottomRows(6)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Break, CalibrationHitsRequestedSnr) {
    for (Dependence dep : {Dependence::Iid, Dependence::Far1}) {
        DgpConfig cfg = config(3, 50, 19);
        cfg.dependence = dep;
        const auto draw = simulate_dgp(cfg);
        const double theta = 0.3;
        const auto d = break_function(5, snr_to_c(0.7, theta, draw.longrun_trace), draw.permutation);
        EXPECT_NEAR(theta * (1.0 - theta) * d.squaredNorm() / draw.longrun_trace, 0.7, 1e-12);
    }
}

TEST(Break, DetectorInvariantToPermutation) {
    DgpConfig a = config(3, 70, 20), b = a;
    b.permute = false;
    const auto xa = gen_innovations(a), xb = gen_innovations(b);
    EXPECT_NEAR(detector_stat(xa), detector_stat(xb), 1e-12);
    const auto ea = clipped_eigenvalues(estimate_longrun(xa, LongRunConfig{}).kernel);
    const auto eb = clipped_eigenvalues(estimate_longrun(xb, LongRunConfig{}).kernel);
    EXPECT_LT((ea - eb).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Names, DetectorsAndExperiments) {
    EXPECT_EQ(parse_detector("fPCA85").name(), "fPCA85");
    EXPECT_DOUBLE_EQ(parse_detector("fPCA90").tve, 0.9);
    EXPECT_EQ(parse_detector("Aligned").kind, DetectorKind::Aligned);
    EXPECT_THROW(parse_detector("fPCA"), DataError);
    EXPECT_THROW(parse_detector("PCA85"), DataError);
    EXPECT_EQ(parse_experiment("coverage"), ExperimentKind::Coverage);
    EXPECT_EQ(parse_dependence("FAR(1)"), Dependence::Far1);
    EXPECT_THROW(parse_dependence("arma"), DataError);
}

TEST(Problems, ListsEveryInvalidValue) {
    ExperimentSpec s;
    s.kind = ExperimentKind::Coverage;
    s.settings = {0, 2, 5};
    s.ns = {8, 100};
    s.ms = {30};
    s.snrs = {0.0};
    s.thetas = {1.2};
    s.detectors = {parse_detector("FF"), parse_detector("Aligned")};
    s.reps = 0;
    const auto p = s.problems();
    auto mentions = [&](const std::string& text) {
        return std::any_of(p.begin(), p.end(), [&](const std::string& msg) { return msg.find(text) != std::string::npos; });
    };
    EXPECT_TRUE(mentions("setting 0"));
    EXPECT_TRUE(mentions("setting 5"));
    EXPECT_TRUE(mentions("n 8"));
    EXPECT_TRUE(mentions("m 30"));
    EXPECT_TRUE(mentions("theta"));
    EXPECT_TRUE(mentions("Aligned"));
    EXPECT_TRUE(mentions("reps"));
    EXPECT_TRUE(mentions("snr must be positive"));
    EXPECT_THROW(run_experiment(s), DataError);
    EXPECT_TRUE(small_spec(ExperimentKind::Size).problems().empty());
}

TEST(RunExperiment, ZeroSnrPowerMatchesSize) {
    auto size = small_spec(ExperimentKind::Size);
    auto power = small_spec(ExperimentKind::Power);
    size.detectors = power.detectors = {parse_detector("FF"), parse_detector("fPCA90"), parse_detector("Aligned")};
    const auto a = run_experiment(size), b = run_experiment(power);
    ASSERT_EQ(a.size(), 3u);
    ASSERT_EQ(b.size(), 3u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].detector, b[i].detector);
        EXPECT_EQ(a[i].value, b[i].value);
        EXPECT_EQ(a[i].metric, "rejection_rate");
        const double p = a[i].value;
        EXPECT_NEAR(*a[i].stderr_value, std::sqrt(p * (1.0 - p) / 40.0), 1e-15);
    }
}

TEST(RunExperiment, IndependentOfThreadCount) {
    auto spec = small_spec(ExperimentKind::Dating);
    spec.detectors = {parse_detector("FF"), parse_detector("fPCA85")};
    std::vector<ResultRow> one, three;
    {
        testsupport::ThreadsEnv env("1");
        one = run_experiment(spec);
    }
    {
        testsupport::ThreadsEnv env("3");
        three = run_experiment(spec);
    }
    ASSERT_EQ(one.size(), three.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        EXPECT_EQ(one[i].metric, three[i].metric);
        EXPECT_EQ(one[i].value, three[i].value);
    }
}

TEST(RunExperiment, CoverageRowsAndCsv) {
    const auto rows = run_experiment(small_spec(ExperimentKind::Coverage));
    std::set<std::string> metrics;
    for (const auto& r : rows) metrics.insert(r.metric);
    EXPECT_TRUE(metrics.count("coverage"));
    EXPECT_TRUE(metrics.count("median_width"));
    EXPECT_TRUE(metrics.count("sigma2_bound_violations"));
    std::ostringstream out;
    write_csv(out, rows);
    std::istringstream in(out.str());
    std::string header, line;
    std::getline(in, header);
    EXPECT_EQ(header, kResultCsvHeader);
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        ++lines;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 11) << line;
    }
    EXPECT_EQ(lines, rows.size());
}
