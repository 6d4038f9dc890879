// funcbreak: detect and date a mean break in a functional time series.
//
//   funcbreak detect [flags] data.csv      fully functional test, JSON report
//   funcbreak date   [flags] data.csv      test plus break-date confidence interval
//   funcbreak simulate size|power|dating|coverage [grid flags]   CSV result table
//
// Exit codes: 0 ok, 2 data or usage error, 3 numerical degeneracy.

#include "funcbreak/fpca.hpp"
#include "funcbreak/ingest.hpp"
#include "funcbreak/report.hpp"
#include "funcbreak/simlab.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace fb = funcbreak;

namespace {

constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct AnalysisFlags {
    std::string input = "-";
    bool coeffs = false;
    std::string export_coeffs;
    std::string out;
    int dimension = fb::kDefaultBasisSize;
    double max_missing = 0.10;
    double alpha = 0.05;
    std::string weight = "bartlett";
    std::string bandwidth = "n14";
    int reps = fb::kDefaultNullReps;
    int grid = fb::kDefaultBridgeGrid;
    std::uint64_t seed = 1;
    bool conservative = false;
    int xi_reps = fb::kDefaultXiReps;
    bool fpca = false;
    double tve = 0.9;
};

void add_analysis_flags(CLI::App* cmd, AnalysisFlags& f, bool dating) {
    cmd->add_option("input", f.input, "CSV file (date,value), or '-' for stdin");
    cmd->add_flag("--coeffs", f.coeffs, "Input is a coefficient CSV (label,c1,...,cD)");
    cmd->add_option("--export-coeffs", f.export_coeffs, "Write the fitted coefficients to this CSV");
    cmd->add_option("--out", f.out, "Write the JSON report here instead of stdout");
    cmd->add_option("-D,--basis", f.dimension, "Number of Fourier basis functions")->check(CLI::PositiveNumber);
    cmd->add_option("--max-missing", f.max_missing, "Drop years with a larger fraction of missing days")
        ->check(CLI::Range(0.0, 0.999999));
    cmd->add_option("--alpha", f.alpha, "Significance level")->check(CLI::Range(1e-9, 1.0 - 1e-9));
    cmd->add_option("--weight", f.weight, "Lag window: bartlett, parzen, flattop")
        ->check(CLI::IsMember({"bartlett", "parzen", "flattop"}));
    cmd->add_option("--bandwidth", f.bandwidth, "Bandwidth rule: n13, n14, n15, adaptive")
        ->check(CLI::IsMember({"n13", "n14", "n15", "adaptive"}));
    cmd->add_option("--reps", f.reps, "Monte Carlo draws of the null limit")->check(CLI::PositiveNumber);
    cmd->add_option("--grid", f.grid, "Brownian bridge grid size")->check(CLI::Range(100, 1 << 24));
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_flag("--fpca", f.fpca, "Also run the fPCA baseline");
    cmd->add_option("--tve", f.tve, "Explained-variance level for the fPCA baseline")->check(CLI::Range(1e-9, 1.0));
    if (dating) {
        cmd->add_flag("--conservative", f.conservative, "Use the leading long-run eigenvalue in place of sigma^2");
        cmd->add_option("--xi-reps", f.xi_reps, "Draws of the limiting argmax")->check(CLI::PositiveNumber);
    }
}

fb::CurveSeries<double> load(const AnalysisFlags& f) {
    const bool from_stdin = f.input == "-";
    std::ifstream file;
    if (!from_stdin) {
        file.open(f.input);
        if (!file) throw fb::DataError("cannot open '" + f.input + "'");
    }
    std::istream& in = from_stdin ? std::cin : file;
    const std::string source = from_stdin ? "<stdin>" : f.input;
    if (f.coeffs) return fb::read_coeff_csv(in, source);
    fb::IngestOptions opt;
    opt.dimension = f.dimension;
    opt.max_missing = f.max_missing;
    auto result = fb::ingest_raw_csv(in, opt, source);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    return std::move(result.series);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fb::DataError("cannot write '" + path + "'");
    out << text;
    if (!out) throw fb::DataError("write to '" + path + "' failed");
}

void run_analysis(const AnalysisFlags& f, bool dating) {
    const auto series = load(f);
    if (!f.export_coeffs.empty()) {
        std::ostringstream csv;
        fb::write_coeff_csv(csv, series);
        write_text(f.export_coeffs, csv.str());
    }
    fb::AnalysisOptions opt;
    opt.alpha = f.alpha;
    opt.longrun = {fb::parse_weight(f.weight), fb::parse_bandwidth(f.bandwidth)};
    opt.reps = f.reps;
    opt.grid = f.grid;
    opt.seed = f.seed;
    opt.date = dating;
    opt.conservative = f.conservative;
    opt.xi_reps = f.xi_reps;
    if (f.fpca) opt.fpca_tve = f.tve;
    // Build the whole document before writing anything so failures never leave a partial report.
    const std::string text = fb::to_json(fb::analyze(series, opt)).dump(2) + "\n";
    write_text(f.out, text);
}

struct SimulateFlags {
    std::string kind;
    std::vector<int> settings{1, 2, 3};
    std::vector<std::string> dependences{"iid", "far1"};
    double kappa = 0.5;
    std::string innovation = "gaussian";
    int df = 3;
    std::vector<long> ns{50, 100};
    std::vector<int> ms{1, 5, 20};
    std::vector<double> snrs{0.0, 0.1, 0.2, 0.3, 0.5, 1.0, 1.5};
    std::vector<double> thetas{0.5};
    std::vector<std::string> detectors{"FF", "fPCA85", "fPCA90", "fPCA95", "Aligned"};
    int reps = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    bool no_permute = false;
    bool conservative = false;
    std::string weight = "bartlett";
    std::string bandwidth = "n14";
    int null_reps = fb::kDefaultNullReps;
    int grid = fb::kDefaultBridgeGrid;
    int xi_reps = 2000;
    int dimension = fb::kDefaultBasisSize;
    double gamma = fb::kDefaultAlignmentExponent;
    std::string out;
};

void add_simulate_flags(CLI::App* cmd, SimulateFlags& f) {
    cmd->add_option("kind", f.kind, "size, power, dating or coverage")
        ->required()
        ->check(CLI::IsMember({"size", "power", "dating", "coverage"}));
    cmd->add_option("--settings", f.settings, "Error settings (1,2,3)")->delimiter(',');
    cmd->add_option("--dependence", f.dependences, "iid and/or far1")->delimiter(',');
    cmd->add_option("--kappa", f.kappa, "FAR(1) operator norm");
    cmd->add_option("--innovation", f.innovation, "gaussian or t")->check(CLI::IsMember({"gaussian", "t"}));
    cmd->add_option("--df", f.df, "Student-t degrees of freedom");
    cmd->add_option("--n", f.ns, "Sample sizes")->delimiter(',');
    cmd->add_option("--m", f.ms, "Break dimensions")->delimiter(',');
    cmd->add_option("--snr", f.snrs, "Signal-to-noise ratios")->delimiter(',');
    cmd->add_option("--theta", f.thetas, "Break fractions")->delimiter(',');
    cmd->add_option("--detectors", f.detectors, "FF, fPCA<pct>, Aligned")->delimiter(',');
    cmd->add_option("--reps", f.reps, "Replications per cell");
    cmd->add_option("--alpha", f.alpha, "Significance or confidence level");
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_flag("--no-permute", f.no_permute, "Keep the canonical basis order");
    cmd->add_flag("--conservative", f.conservative, "Conservative intervals (coverage only)");
    cmd->add_option("--weight", f.weight)->check(CLI::IsMember({"bartlett", "parzen", "flattop"}));
    cmd->add_option("--bandwidth", f.bandwidth)->check(CLI::IsMember({"n13", "n14", "n15", "adaptive"}));
    cmd->add_option("--null-reps", f.null_reps, "Null-limit draws shared by all cells");
    cmd->add_option("--grid", f.grid, "Brownian bridge grid size");
    cmd->add_option("--xi-reps", f.xi_reps, "Draws of the limiting argmax per distinct break fraction");
    cmd->add_option("-D,--basis", f.dimension, "Coefficient dimension");
    cmd->add_option("--gamma", f.gamma, "Alignment exponent");
    cmd->add_option("--out", f.out, "Write the CSV here instead of stdout");
}

void run_simulate(const SimulateFlags& f) {
    fb::ExperimentSpec spec;
    spec.kind = fb::parse_experiment(f.kind);
    spec.settings = f.settings;
    spec.dependences.clear();
    std::vector<std::string> errors;
    for (const auto& d : f.dependences) {
        try {
            spec.dependences.push_back(fb::parse_dependence(d));
        } catch (const fb::DataError& e) {
            errors.push_back(e.what());
        }
    }
    spec.kappa = f.kappa;
    spec.innovation = f.innovation == "t" ? fb::Innovation::StudentT : fb::Innovation::Gaussian;
    spec.df = f.df;
    spec.ns.assign(f.ns.begin(), f.ns.end());
    spec.ms = f.ms;
    spec.snrs = f.snrs;
    spec.thetas = f.thetas;
    spec.detectors.clear();
    for (const auto& d : f.detectors) {
        try {
            spec.detectors.push_back(fb::parse_detector(d));
        } catch (const fb::DataError& e) {
            errors.push_back(e.what());
        }
    }
    spec.reps = f.reps;
    spec.alpha = f.alpha;
    spec.seed = f.seed;
    spec.permute = !f.no_permute;
    spec.conservative = f.conservative;
    spec.longrun = {fb::parse_weight(f.weight), fb::parse_bandwidth(f.bandwidth)};
    spec.null_reps = f.null_reps;
    spec.bridge_grid = f.grid;
    spec.xi_reps = f.xi_reps;
    spec.dimension = f.dimension;
    spec.gamma = f.gamma;
    for (auto& p : spec.problems()) errors.push_back(std::move(p));
    if (!errors.empty()) {
        std::ostringstream msg;
        msg << "invalid experiment grid:";
        for (const auto& e : errors) msg << "\n  - " << e;
        throw fb::DataError(msg.str());
    }
    std::ostringstream csv;
    fb::write_csv(csv, fb::run_experiment(spec));
    write_text(f.out, csv.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structural break detection and dating for functional time series"};
    app.require_subcommand(1);
    AnalysisFlags detect_flags;
    AnalysisFlags date_flags;
    SimulateFlags sim_flags;
    auto* detect = app.add_subcommand("detect", "Test for a mean break and write a JSON report");
    add_analysis_flags(detect, detect_flags, false);
    auto* date = app.add_subcommand("date", "Estimate the break date with a confidence interval");
    add_analysis_flags(date, date_flags, true);
    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment grid and write CSV");
    add_simulate_flags(simulate, sim_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitData;
    }

    try {
        if (*detect) run_analysis(detect_flags, false);
        if (*date) run_analysis(date_flags, true);
        if (*simulate) run_simulate(sim_flags);
    } catch (const fb::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const fb::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
