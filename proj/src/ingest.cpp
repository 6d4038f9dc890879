#include "funcbreak/ingest.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace funcbreak {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

[[noreturn]] void fail(const std::string& source, long line, const std::string& what) {
    throw DataError(source + ":" + std::to_string(line) + ": " + what);
}

bool parse_double(const std::string& field, double& out) {
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

void strip_bom(std::string& line) {
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
}

struct DayOfYear {
    int year;
    int day;   // 1-based
    int days;  // 365 or 366
};

bool parse_date(const std::string& text, DayOfYear& out) {
    using namespace std::chrono;
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
    auto num = [&](std::size_t pos, std::size_t len, auto& value) {
        const char* b = text.data() + pos;
        auto [ptr, ec] = std::from_chars(b, b + len, value);
        return ec == std::errc() && ptr == b + len;
    };
    if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return false;
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) return false;
    const sys_days jan1{year{y} / January / 1};
    out.year = y;
    out.day = static_cast<int>((sys_days{ymd} - jan1).count()) + 1;
    out.days = year{y}.is_leap() ? 366 : 365;
    return true;
}

std::ifstream open_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return in;
}

}  // namespace

IngestResult ingest_raw_csv(std::istream& in, const IngestOptions& options, const std::string& source) {
    if (options.dimension < 1) throw DataError("basis size must be at least 1");
    if (!(options.max_missing >= 0.0 && options.max_missing < 1.0)) throw DataError("missing-data threshold must lie in [0,1)");
    std::string line;
    long lineno = 1;
    if (!read_line(in, line)) throw DataError(source + ": empty file");
    strip_bom(line);
    const auto header = split_fields(line);
    if (header.size() != 2 || lower(header[0]) != "date" || lower(header[1]) != "value")
        fail(source, lineno, "expected header 'date,value'");

    // year -> day -> value (NaN for explicit missing)
    std::map<int, std::map<int, double>> years;
    std::map<int, int> year_days;
    while (read_line(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 2) fail(source, lineno, "expected 2 fields, found " + std::to_string(fields.size()));
        DayOfYear doy{};
        if (!parse_date(fields[0], doy)) fail(source, lineno, "unparseable date '" + fields[0] + "'");
        double value = std::numeric_limits<double>::quiet_NaN();
        if (!fields[1].empty() && lower(fields[1]) != "na" && !parse_double(fields[1], value))
            fail(source, lineno, "unparseable value '" + fields[1] + "'");
        auto& days = years[doy.year];
        if (!days.emplace(doy.day, value).second) fail(source, lineno, "duplicate date " + fields[0]);
        year_days[doy.year] = doy.days;
    }
    if (years.empty()) throw DataError(source + ": no observations");

    std::vector<std::string> labels;
    std::vector<Eigen::VectorXd> rows;
    std::vector<std::string> dropped;
    for (int y = years.begin()->first; y <= years.rbegin()->first; ++y) {
        const auto it = years.find(y);
        int present = 0;
        if (it != years.end())
            for (const auto& [day, v] : it->second)
                if (std::isfinite(v)) ++present;
        const int ydays = year_days.count(y) ? year_days[y] : 365;
        const double missing = 1.0 - static_cast<double>(present) / ydays;
        if (missing > options.max_missing) {
            dropped.push_back(std::to_string(y));
            continue;
        }
        if (present < options.dimension)
            throw DataError(source + ": year " + std::to_string(y) + " has " + std::to_string(present) +
                            " values, fewer than the " + std::to_string(options.dimension) + " basis functions");
        std::vector<double> t;
        std::vector<double> v;
        for (const auto& [day, value] : it->second) {
            t.push_back((day - 0.5) / ydays);
            v.push_back(value);
        }
        rows.push_back(project_curve<double>(t, v, options.dimension, static_cast<Eigen::Index>(rows.size())));
        labels.push_back(std::to_string(y));
    }
    if (rows.empty()) throw DataError(source + ": no usable years after the missing-data rule");

    CoeffMatrix<double> coeffs(static_cast<Eigen::Index>(rows.size()), options.dimension);
    for (std::size_t i = 0; i < rows.size(); ++i) coeffs.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    std::vector<std::string> warnings;
    if (!dropped.empty()) {
        std::ostringstream w;
        w << "dropped " << dropped.size() << " year(s) with more than " << options.max_missing * 100.0
          << "% missing days:";
        for (const auto& y : dropped) w << ' ' << y;
        warnings.push_back(w.str());
    }
    return {CurveSeries<double>(std::move(coeffs), FourierBasis<double>(options.dimension), std::move(labels)),
            std::move(dropped), std::move(warnings)};
}

IngestResult ingest_raw_file(const std::string& path, const IngestOptions& options) {
    auto in = open_file(path);
    return ingest_raw_csv(in, options, path);
}

CurveSeries<double> read_coeff_csv(std::istream& in, const std::string& source) {
    std::string line;
    long lineno = 1;
    if (!read_line(in, line)) throw DataError(source + ": empty file");
    strip_bom(line);
    const auto header = split_fields(line);
    if (header.size() < 2 || lower(header[0]) != "label") fail(source, lineno, "expected header 'label,c1,...,cD'");
    for (std::size_t j = 1; j < header.size(); ++j)
        if (lower(header[j]) != "c" + std::to_string(j))
            fail(source, lineno, "expected column 'c" + std::to_string(j) + "', found '" + header[j] + "'");
    const auto d = static_cast<Eigen::Index>(header.size() - 1);

    std::vector<std::string> labels;
    std::vector<double> values;
    while (read_line(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (static_cast<Eigen::Index>(fields.size()) != d + 1)
            fail(source, lineno, "expected " + std::to_string(d + 1) + " fields, found " + std::to_string(fields.size()));
        for (std::size_t j = 1; j < fields.size(); ++j) {
            double v = 0.0;
            if (!parse_double(fields[j], v)) fail(source, lineno, "unparseable coefficient '" + fields[j] + "'");
            values.push_back(v);
        }
        labels.push_back(fields[0]);
    }
    const auto n = static_cast<Eigen::Index>(labels.size());
    if (n < 2) throw DataError(source + ": a curve series needs at least two curves");
    CoeffMatrix<double> coeffs = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), n, d);
    return CurveSeries<double>(std::move(coeffs), FourierBasis<double>(static_cast<int>(d)), std::move(labels));
}

CurveSeries<double> read_coeff_file(const std::string& path) {
    auto in = open_file(path);
    return read_coeff_csv(in, path);
}

void write_coeff_csv(std::ostream& out, const CurveSeries<double>& series) {
    out << "label";
    for (int j = 1; j <= series.dimension(); ++j) out << ",c" << j;
    out << '\n';
    char buf[32];
    for (Eigen::Index i = 0; i < series.size(); ++i) {
        out << series.labels()[static_cast<std::size_t>(i)];
        for (int j = 0; j < series.dimension(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", series.coeffs()(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
}

}  // namespace funcbreak
