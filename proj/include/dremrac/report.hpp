#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dremrac/config.hpp"
#include "dremrac/sim.hpp"

namespace dremrac {

/// Fixed trace schema, 17-significant-digit decimal by default so that a
/// written trace re-reads to identical doubles.
std::vector<std::string> csv_header(int n, int m);
void write_csv(const SimTrace& trace, const std::string& path, int precision = 17);
std::string csv_text(const SimTrace& trace, int precision = 17);

struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
CsvData read_csv(const std::string& path);

/// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Slope of log ||theta_tilde|| over [t_from, end of trace]; values below
/// 1e-300 are floored before the log. Empty window yields nullopt.
std::optional<double> decay_slope(const SimTrace& trace, double t_from);

struct AssertionResult {
    std::string name;
    bool enabled = true;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string comparison;  // "<=", ">=", "==", "in-band"
    std::string detail;
};

struct Report {
    static constexpr const char* schema_version = "1.0";
    std::vector<AssertionResult> assertions;
    // Run summary statistics.
    std::optional<double> t_e_detected;
    int switch_count = 0;
    double max_xi = 0.0;
    double max_Omega = 0.0;
    double min_Omega_after_te = 0.0;
    double final_eref = 0.0;
    double final_theta_tilde = 0.0;
    std::optional<double> fitted_slope;
    std::vector<std::string> warnings;

    bool all_pass() const;
};

/// Evaluates every enabled assertion against a completed trace. theta_true
/// (the matching-gain oracle) backs the component-wise monotonicity and decay
/// assertions; without it those are skipped and marked accordingly.
Report evaluate(const SimTrace& trace, const AssertionSettings& settings, double gamma1,
                const std::optional<Mat>& theta_true);

std::string report_json(const Report& report);
void write_report(const Report& report, const std::string& path);

}  // namespace dremrac
