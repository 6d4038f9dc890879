#include "funcbreak/ingest.hpp"
#include "funcbreak/report.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

using namespace funcbreak;

namespace {

/// Daily `date,value` CSV for whole years; value(year, t) with t = (day - 0.5) / Y.
std::string daily_csv(int first, int last, const std::function<double(int, double)>& value,
                      const std::function<bool(int, int)>& missing = nullptr) {
    using namespace std::chrono;
    std::ostringstream out;
    out << "date,value\n";
    for (int y = first; y <= last; ++y) {
        const sys_days start{year{y} / January / 1};
        const int days = year{y}.is_leap() ? 366 : 365;
        for (int d = 1; d <= days; ++d) {
            const year_month_day ymd{start + std::chrono::days{d - 1}};
            char buf[16];
            std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                          static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
            out << buf << ',';
            if (!(missing && missing(y, d))) {
                char v[40];
                std::snprintf(v, sizeof v, "%.17g", value(y, (d - 0.5) / days));
                out << v;
            }
            out << '\n';
        }
    }
    return out.str();
}

IngestResult ingest(const std::string& text, IngestOptions opts = {}) {
    std::istringstream in(text);
    return ingest_raw_csv(in, opts, "mem.csv");
}

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

CurveSeries<double> synthetic_series(Eigen::Index n, std::uint64_t seed, double jump) {
    Eigen::MatrixXd x = testsupport::gaussian_matrix(n, kDefaultBasisSize, seed, 0.3);
    x.bottomRows(n / 2).col(1).array() += jump;
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < n; ++i) labels.push_back(std::to_string(1950 + i));
    return CurveSeries<double>(x, FourierBasis<double>(), labels);
}

AnalysisOptions quick_options() {
    AnalysisOptions o;
    o.reps = 200;
    o.grid = 200;
    o.xi_reps = 500;
    return o;
}

}  // namespace

TEST(Ingest, ConstantYearsGiveConstantCoefficient) {
    const auto r = ingest(daily_csv(2001, 2002, [](int, double) { return 5.0; }));
    ASSERT_EQ(r.series.size(), 2);
    EXPECT_EQ(r.series.labels(), (std::vector<std::string>{"2001", "2002"}));
    for (Eigen::Index i = 0; i < 2; ++i) {
        EXPECT_NEAR(r.series.coeffs()(i, 0), 5.0, 1e-10);
        EXPECT_LT(r.series.coeffs().row(i).tail(20).cwiseAbs().maxCoeff(), 1e-10);
    }
    EXPECT_TRUE(r.warnings.empty());
}

TEST(Ingest, LeapYearUsesItsOwnDayCount) {
    const double pi = std::acos(-1.0);
    const auto r = ingest(daily_csv(2019, 2020, [&](int, double t) { return std::sin(2.0 * pi * t); }));
    for (Eigen::Index i = 0; i < 2; ++i) EXPECT_NEAR(r.series.coeffs()(i, 1), 1.0 / std::sqrt(2.0), 1e-10) << i;
}

TEST(Ingest, ErrorsCarryLineNumbers) {
    EXPECT_NE(error_of([] { ingest("date,value\n2001-01-01,1\n2001-01-02,abc\n"); }).find("mem.csv:3:"), std::string::npos);
    EXPECT_NE(error_of([] { ingest("date,value\n2001-13-01,1\n"); }).find("mem.csv:2:"), std::string::npos);
    EXPECT_NE(error_of([] { ingest("day,value\n"); }).find("mem.csv:1:"), std::string::npos);
    EXPECT_NE(error_of([] { ingest("date,value\n2001-01-01,1\n2001-01-01,2\n"); }).find("duplicate"), std::string::npos);
    EXPECT_NE(error_of([] { ingest("date,value\n2001-01-01,1,2\n"); }).find("mem.csv:2:"), std::string::npos);
}

TEST(Ingest, MissingDaysAndDroppedYears) {
    // 2002 misses 20% of its days, 2003 misses 5% (blank and NA forms).
    const auto text = daily_csv(2001, 2004, [](int y, double t) { return y + t; }, [](int y, int d) {
        return (y == 2002 && d % 5 == 0) || (y == 2003 && d % 20 == 0);
    });
    const auto r = ingest(text);
    EXPECT_EQ(r.dropped, std::vector<std::string>{"2002"});
    EXPECT_EQ(r.series.labels(), (std::vector<std::string>{"2001", "2003", "2004"}));
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("2002"), std::string::npos);
    std::string na = text;
    for (std::size_t p = na.find(",\n"); p != std::string::npos; p = na.find(",\n", p + 3)) na.replace(p, 2, ",NA\n");
    EXPECT_EQ(ingest(na).series.coeffs(), r.series.coeffs());
}

TEST(Ingest, NoUsableYears) {
    const auto text = daily_csv(2001, 2002, [](int, double) { return 1.0; }, [](int, int d) { return d % 2 == 0; });
    EXPECT_NE(error_of([&] { ingest(text); }).find("no usable years"), std::string::npos);
    EXPECT_THROW(ingest(""), DataError);
}

TEST(CoeffCsv, RoundTripIsExact) {
    const auto s = synthetic_series(12, 3, 0.0);
    std::stringstream buf;
    write_coeff_csv(buf, s);
    const auto back = read_coeff_csv(buf);
    EXPECT_EQ(back.coeffs(), s.coeffs());
    EXPECT_EQ(back.labels(), s.labels());
}

TEST(CoeffCsv, HeaderAndShapeErrors) {
    auto read = [](const std::string& text) {
        std::istringstream in(text);
        return read_coeff_csv(in, "c.csv");
    };
    EXPECT_NE(error_of([&] { read("label,c1,c3\na,1,2\nb,3,4\n"); }).find("c.csv:1:"), std::string::npos);
    EXPECT_NE(error_of([&] { read("label,c1\na,1\nb,1,2\n"); }).find("c.csv:3:"), std::string::npos);
    EXPECT_THROW(read("label,c1\na,1\n"), DataError);
    EXPECT_THROW(read("label,c1\na,nan\nb,1\n"), DataError);
}

TEST(LabelAt, ClampsIntoRange) {
    const std::vector<std::string> l{"a", "b", "c"};
    EXPECT_EQ(label_at(l, -4.0), "a");
    EXPECT_EQ(label_at(l, 2.0), "b");
    EXPECT_EQ(label_at(l, 9.0), "c");
    EXPECT_EQ(label_at(l, INFINITY), "c");
    EXPECT_THROW(label_at({}, 1.0), DataError);
}

TEST(Report, JsonFieldsAndConfigEcho) {
    auto o = quick_options();
    o.date = true;
    o.fpca_tve = 0.9;
    o.seed = 17;
    const auto res = analyze(synthetic_series(60, 4, 1.0), o);
    const auto doc = to_json(res);
    for (const char* key : {"stat", "p_value", "critical_values", "reject", "k_hat", "k_hat_label", "theta_hat",
                            "sigma2_hat", "ci", "lambda1", "sigma2_used", "break_norm_sq", "xi_quantiles", "fpca", "config"})
        EXPECT_TRUE(doc.contains(key)) << key;
    EXPECT_EQ(doc["k_hat"], 30);
    EXPECT_EQ(doc["k_hat_label"], "1979");
    EXPECT_TRUE(doc["reject"].get<bool>());
    EXPECT_LE(doc["ci"]["lo"].get<double>(), 30.0);
    EXPECT_GE(doc["ci"]["hi"].get<double>(), 30.0);
    EXPECT_LE(doc["sigma2_hat"].get<double>(), doc["lambda1"].get<double>() * (1.0 + 1e-12));
    const auto& cfg = doc["config"];
    EXPECT_EQ(cfg["n"], 60);
    EXPECT_EQ(cfg["D"], 21);
    EXPECT_EQ(cfg["R"], 200);
    EXPECT_EQ(cfg["G"], 200);
    EXPECT_EQ(cfg["seed"], 17);
    EXPECT_EQ(cfg["weight"], "bartlett");
    EXPECT_EQ(cfg["xi_reps"], 500);
    EXPECT_DOUBLE_EQ(cfg["fpca_tve"].get<double>(), 0.9);
    EXPECT_EQ(doc["fpca"]["k_tilde_by_d"][0]["d"], 1);
}

TEST(Report, SameSeedIsByteIdentical) {
    auto o = quick_options();
    o.date = true;
    const auto s = synthetic_series(40, 5, 0.5);
    EXPECT_EQ(to_json(analyze(s, o)).dump(2), to_json(analyze(s, o)).dump(2));
}

TEST(Report, SingleReplicationPValue) {
    auto o = quick_options();
    o.reps = 1;
    const auto p = to_json(analyze(synthetic_series(30, 6, 0.0), o))["p_value"].get<double>();
    EXPECT_TRUE(p == 0.5 || p == 1.0) << p;
}

TEST(Report, DetectWithoutDatingHasNullInterval) {
    const auto doc = to_json(analyze(synthetic_series(30, 7, 0.0), quick_options()));
    EXPECT_TRUE(doc["ci"].is_null());
    EXPECT_TRUE(doc["config"]["xi_reps"].is_null());
}

TEST(Report, NonFiniteFieldIsRejected) {
    auto res = analyze(synthetic_series(30, 8, 0.0), quick_options());
    res.detection.stat = NAN;
    EXPECT_THROW(to_json(res), NumericalError);
}
