#include "funcbreak/cusum.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace funcbreak;
using testsupport::direct_cusum;
using testsupport::gaussian_matrix;
using testsupport::step_series;

TEST(CusumNormSq, IdenticalCurvesGiveZero) {
    Eigen::MatrixXd x(12, 5);
    x.rowwise() = gaussian_matrix(1, 5, 3).row(0);
    EXPECT_LT(cusum_norm_sq(x).cwiseAbs().maxCoeff(), 1e-24);
}

TEST(CusumNormSq, TiedDownAtBothEnds) {
    const auto s = cusum_norm_sq(gaussian_matrix(30, 21, 1));
    ASSERT_EQ(s.size(), 31);
    EXPECT_EQ(s(0), 0.0);
    EXPECT_EQ(s(30), 0.0);
}

TEST(CusumNormSq, MatchesDirectSummation) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::MatrixXd x = gaussian_matrix(40 + static_cast<Eigen::Index>(seed), 21, seed);
        const auto s = cusum_norm_sq(x);
        for (Eigen::Index k = 0; k <= x.rows(); ++k) EXPECT_NEAR(s(k), direct_cusum(x, k), 1e-10);
    }
}

TEST(CusumAt, NormAgreesWithNormSq) {
    const Eigen::MatrixXd x = gaussian_matrix(25, 7, 4);
    const auto s = cusum_norm_sq(x);
    for (Eigen::Index k : {1, 10, 24}) EXPECT_NEAR(cusum_at(x, k).squaredNorm(), s(k), 1e-12);
}

TEST(DetectorStat, ConstantSeriesIsZero) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(20, 4, 2.5);
    EXPECT_NEAR(detector_stat(x), 0.0, 1e-24);
}

TEST(DetectorStat, NoiselessStepClosedForm) {
    Eigen::VectorXd delta(3);
    delta << 1.0, -2.0, 0.5;
    for (Eigen::Index n : {10, 37, 100})
        for (Eigen::Index k : {Eigen::Index{1}, n / 3, n - 1}) {
            const double nn = static_cast<double>(n), kk = static_cast<double>(k);
            const double expected = kk * kk * (nn - kk) * (nn - kk) / (nn * nn * nn) * delta.squaredNorm();
            EXPECT_NEAR(detector_stat(step_series(n, k, delta)), expected, 1e-10 * std::max(1.0, expected));
        }
}

TEST(DetectorStat, LocationInvariantAndScaleEquivariant) {
    const Eigen::MatrixXd x = gaussian_matrix(60, 21, 8);
    const Eigen::RowVectorXd mu = gaussian_matrix(1, 21, 9).row(0) * 10.0;
    const Eigen::MatrixXd shifted = x.rowwise() + mu;
    const double t = detector_stat(x);
    EXPECT_NEAR(detector_stat(shifted), t, 1e-10);
    EXPECT_NEAR(detector_stat((3.0 * x).eval()), 9.0 * t, 1e-10);
}

TEST(DetectorStat, TimeReversalMapsEntryKToNMinusK) {
    const Eigen::MatrixXd x = gaussian_matrix(33, 6, 10);
    const Eigen::MatrixXd rev = x.colwise().reverse();
    const auto a = cusum_norm_sq(x), b = cusum_norm_sq(rev);
    for (Eigen::Index k = 0; k <= 33; ++k) EXPECT_NEAR(a(k), b(33 - k), 1e-12);
    EXPECT_NEAR(detector_stat(x), detector_stat(rev), 1e-12);
}

TEST(BreakDate, NoiselessStepIsExact) {
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(21);
    delta(4) = 0.7;
    for (Eigen::Index n : {10, 50})
        for (Eigen::Index k = 1; k < n; ++k) EXPECT_EQ(estimate_break_date(step_series(n, k, delta)), k);
}

TEST(BreakDate, AllEqualSeriesPicksFirstIndex) {
    EXPECT_EQ(estimate_break_date(Eigen::MatrixXd::Ones(15, 3).eval()), 1);
}

TEST(BreakDate, InvariantToShiftAndPositiveScale) {
    Eigen::MatrixXd x = gaussian_matrix(80, 21, 12);
    x.bottomRows(40).array() += 0.8;
    const Eigen::Index k = estimate_break_date(x);
    const Eigen::MatrixXd moved = (2.5 * x).rowwise() + gaussian_matrix(1, 21, 13).row(0);
    EXPECT_EQ(estimate_break_date(moved), k);
}

TEST(FirstArgmax, TieBreaksToSmallestIndex) {
    Eigen::VectorXd v(6);
    v << 0.0, 2.0, 5.0, 5.0, 1.0, 0.0;
    EXPECT_EQ(first_argmax(v), 2);
}
