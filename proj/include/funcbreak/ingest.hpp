#pragma once

#include "funcbreak/fda.hpp"

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace funcbreak {

struct IngestOptions {
    int dimension = kDefaultBasisSize;
    double max_missing = 0.10;  // a year is dropped when more than this fraction of its days is missing
};

struct IngestResult {
    CurveSeries<double> series;
    std::vector<std::string> dropped;  // year labels removed by the missing-data rule
    std::vector<std::string> warnings;
};

/// Reads a `date,value` CSV (ISO dates, empty value = missing), groups observations by calendar year,
/// maps day k of a Y-day year to (k - 0.5) / Y and fits each retained year on the Fourier basis.
/// Curves are labeled by year.
IngestResult ingest_raw_csv(std::istream& in, const IngestOptions& options = {}, const std::string& source = "<input>");
IngestResult ingest_raw_file(const std::string& path, const IngestOptions& options = {});

/// Pre-smoothed coefficients, header `label,c1,...,cD`.
CurveSeries<double> read_coeff_csv(std::istream& in, const std::string& source = "<input>");
CurveSeries<double> read_coeff_file(const std::string& path);

/// Writes `label,c1,...,cD` with 17 significant digits so a re-read reproduces every coefficient.
void write_coeff_csv(std::ostream& out, const CurveSeries<double>& series);

}  // namespace funcbreak
