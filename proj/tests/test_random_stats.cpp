#include "funcbreak/random.hpp"
#include "funcbreak/stats.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>

using namespace funcbreak;

TEST(Seeds, DeterministicAndKeySensitive) {
    EXPECT_EQ(derive_seed(7, {1, 2}), derive_seed(7, {1, 2}));
    EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
    EXPECT_NE(derive_seed(7, {1}), derive_seed(8, {1}));
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 10000; ++r) seen.insert(derive_seed(1, {r}));
    EXPECT_EQ(seen.size(), 10000u);
}

TEST(Seeds, StreamsReproduce) {
    Rng a = make_stream(3, {4});
    Rng b = make_stream(3, {4});
    for (int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
    testsupport::ThreadsEnv env("4");
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, RethrowsWorkerException) {
    testsupport::ThreadsEnv env("3");
    EXPECT_THROW(parallel_for(50, [](std::size_t i) {
                     if (i == 17) throw std::runtime_error("boom");
                 }),
                 std::runtime_error);
}

TEST(ParallelFor, WorkerCountHonoursEnvironment) {
    testsupport::ThreadsEnv env("2");
    EXPECT_EQ(worker_count(), 2u);
}

TEST(Quantile, TypeSevenInterpolation) {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    EXPECT_DOUBLE_EQ(stats::quantile_sorted(x, 0.25), 1.75);
    EXPECT_DOUBLE_EQ(stats::quantile_sorted(x, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(stats::quantile_sorted(x, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(stats::median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_DOUBLE_EQ(stats::quantile({4.0, 3.0, 2.0, 1.0}, 0.5), 2.5);
}

TEST(Moments, MeanAndStdev) {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    EXPECT_DOUBLE_EQ(stats::mean(x), 2.5);
    EXPECT_NEAR(stats::stdev(x), std::sqrt(5.0 / 3.0), 1e-15);
}

TEST(Kolmogorov, KnownQuantile) {
    EXPECT_NEAR(stats::kolmogorov_survival(1.3581), 0.05, 1e-4);
    EXPECT_NEAR(stats::kolmogorov_survival(1.6276), 0.01, 1e-4);
    EXPECT_DOUBLE_EQ(stats::kolmogorov_survival(0.0), 1.0);
}

TEST(KsTest, IdenticalSamplesDoNotReject) {
    const std::vector<double> a{0.1, 0.4, 0.5, 0.9};
    const auto r = stats::ks_two_sample(a, a);
    EXPECT_DOUBLE_EQ(r.statistic, 0.0);
    EXPECT_GT(r.p_value, 0.99);
}

TEST(KsTest, HandlesTiesAcrossSamples) {
    const auto r = stats::ks_two_sample({0, 0, 1, 1}, {0, 1, 1, 1});
    EXPECT_DOUBLE_EQ(r.statistic, 0.25);
}

TEST(KsTest, DetectsShift) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    std::vector<double> a(500), b(500);
    for (auto& v : a) v = z(rng);
    for (auto& v : b) v = z(rng) + 0.5;
    EXPECT_LT(stats::ks_two_sample(a, b).p_value, 1e-4);
}

TEST(KsTest, UniformSample) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u;
    std::vector<double> a(2000);
    for (auto& v : a) v = u(rng);
    EXPECT_GT(stats::ks_uniform(a).p_value, 0.01);
    for (auto& v : a) v = v * v;
    EXPECT_LT(stats::ks_uniform(a).p_value, 1e-6);
}
