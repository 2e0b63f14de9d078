#include "dremrac/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace dremrac {

namespace {

std::string fmt(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

// vec(theta_hat - theta_true), column-major per the trace schema.
std::vector<double> vec_tilde(const Mat& theta_hat, const Mat& theta_true) {
    std::vector<double> v;
    v.reserve(static_cast<size_t>(theta_hat.size()));
    for (int c = 0; c < theta_hat.cols(); ++c)
        for (int r = 0; r < theta_hat.rows(); ++r)
            v.push_back(theta_hat(r, c) - theta_true(r, c));
    return v;
}

}  // namespace

std::vector<std::string> csv_header(int n, int m) {
    std::vector<std::string> h;
    h.push_back("t");
    for (int i = 1; i <= n; ++i) h.push_back("x" + std::to_string(i));
    for (int i = 1; i <= n; ++i) h.push_back("xref" + std::to_string(i));
    for (int i = 1; i <= m; ++i) h.push_back("u" + std::to_string(i));
    h.push_back("eref_norm");
    h.push_back("Delta");
    h.push_back("Omega");
    h.push_back("gamma");
    for (int c = 1; c <= m; ++c)
        for (int r = 1; r <= n + m; ++r)
            h.push_back("thetahat_" + std::to_string(r) + "_" + std::to_string(c));
    h.push_back("thetatilde_norm");
    h.push_back("xi_norm");
    h.push_back("switch_flag");
    return h;
}

std::string csv_text(const SimTrace& trace, int precision) {
    std::ostringstream os;
    const auto header = csv_header(trace.n, trace.m);
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& row : trace.rows) {
        os << fmt(row.t, precision);
        for (int i = 0; i < row.x.rows(); ++i) os << "," << fmt(row.x[i], precision);
        for (int i = 0; i < row.x_ref.rows(); ++i) os << "," << fmt(row.x_ref[i], precision);
        for (int i = 0; i < row.u.rows(); ++i) os << "," << fmt(row.u[i], precision);
        os << "," << fmt(row.eref_norm, precision);
        os << "," << fmt(row.Delta, precision);
        os << "," << fmt(row.Omega, precision);
        os << "," << fmt(row.gamma, precision);
        for (int c = 0; c < row.theta_hat.cols(); ++c)
            for (int r = 0; r < row.theta_hat.rows(); ++r)
                os << "," << fmt(row.theta_hat(r, c), precision);
        os << "," << fmt(row.theta_tilde_norm, precision);
        os << "," << fmt(row.xi_norm, precision);
        os << "," << row.switch_flag;
        os << "\n";
    }
    return os.str();
}

void write_csv(const SimTrace& trace, const std::string& path, int precision) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open trace output '" + path + "'");
    out << csv_text(trace, precision);
    if (!out) throw std::runtime_error("write failure on '" + path + "'");
}

CsvData read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    CsvData data;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV '" + path + "'");
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) data.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        if (row.size() != data.header.size())
            throw std::runtime_error("ragged CSV row in '" + path + "'");
        data.rows.push_back(std::move(row));
    }
    return data;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("ls_slope: need two equal-length samples at least");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("ls_slope: degenerate abscissa");
    return (n * sxy - sx * sy) / denom;
}

std::optional<double> decay_slope(const SimTrace& trace, double t_from) {
    std::vector<double> ts, ys;
    for (const auto& row : trace.rows) {
        if (row.t < t_from || !std::isfinite(row.theta_tilde_norm)) continue;
        ts.push_back(row.t);
        ys.push_back(std::log(std::max(row.theta_tilde_norm, 1e-300)));
    }
    if (ts.size() < 2) return std::nullopt;
    return ls_slope(ts, ys);
}

bool Report::all_pass() const {
    for (const auto& a : assertions)
        if (a.enabled && !a.pass) return false;
    return true;
}

Report evaluate(const SimTrace& trace, const AssertionSettings& settings, double gamma1,
                const std::optional<Mat>& theta_true) {
    Report rep;
    rep.t_e_detected = trace.t_e_detected;
    rep.switch_count = trace.switch_count;
    rep.max_xi = trace.max_xi;
    rep.max_Omega = trace.max_Omega;
    rep.min_Omega_after_te = trace.min_Omega_after_te;
    if (!trace.rows.empty()) {
        rep.final_eref = trace.rows.back().eref_norm;
        rep.final_theta_tilde = trace.rows.back().theta_tilde_norm;
    }
    if (trace.t_e_detected) rep.fitted_slope = decay_slope(trace, *trace.t_e_detected);

    const auto add = [&](AssertionResult a) { rep.assertions.push_back(std::move(a)); };

    if (settings.monotonicity) {
        AssertionResult a;
        a.name = "theta_tilde_componentwise_monotone";
        a.comparison = "<=";
        a.threshold = settings.monotonicity_tol;
        if (!theta_true || trace.rows.empty()) {
            a.enabled = false;
            a.detail = "skipped: no parameter oracle available";
        } else {
            std::vector<double> run_min(static_cast<size_t>(theta_true->size()),
                                        std::numeric_limits<double>::infinity());
            double worst = -std::numeric_limits<double>::infinity();
            for (const auto& row : trace.rows) {
                const auto tilde = vec_tilde(row.theta_hat, *theta_true);
                for (size_t i = 0; i < tilde.size(); ++i) {
                    const double mag = std::fabs(tilde[i]);
                    worst = std::max(worst, mag - run_min[i]);
                    run_min[i] = std::min(run_min[i], mag);
                }
            }
            a.measured = worst;
            a.pass = worst <= settings.monotonicity_tol;
            a.detail = "max increase of any |theta_tilde_i| above its running minimum";
        }
        add(std::move(a));
    }

    if (settings.single_switch) {
        AssertionResult a;
        a.name = "gain_branch_single_switch";
        a.comparison = "==";
        a.threshold = 1.0;
        a.measured = static_cast<double>(trace.switch_count);
        a.pass = trace.switch_count == 1;
        a.detail = "number of inactive-to-active gain transitions";
        add(std::move(a));
    }

    if (settings.fe_detection) {
        AssertionResult a;
        a.name = "fe_detection_time_in_band";
        a.comparison = "in-band";
        a.threshold = settings.fe_band_max;
        if (trace.t_e_detected) {
            a.measured = *trace.t_e_detected;
            a.pass = *trace.t_e_detected >= settings.fe_band_min &&
                     *trace.t_e_detected <= settings.fe_band_max;
            a.detail = "band [" + std::to_string(settings.fe_band_min) + ", " +
                       std::to_string(settings.fe_band_max) + "] s";
        } else {
            a.measured = std::numeric_limits<double>::quiet_NaN();
            a.pass = false;
            a.detail = "excitation threshold never reached";
        }
        add(std::move(a));
    }

    if (settings.decay_slope) {
        AssertionResult a;
        a.name = "log_theta_tilde_decay_slope";
        a.comparison = "<=";
        a.threshold = -settings.slope_margin * gamma1;
        if (rep.fitted_slope) {
            a.measured = *rep.fitted_slope;
            a.pass = *rep.fitted_slope <= a.threshold;
            a.detail = "least-squares slope of log||theta_tilde|| on [t_e, T]";
        } else if (!theta_true) {
            a.enabled = false;
            a.detail = "skipped: no parameter oracle available";
        } else {
            a.measured = std::numeric_limits<double>::quiet_NaN();
            a.pass = false;
            a.detail = "no decay window (excitation never detected)";
        }
        add(std::move(a));
    }

    if (settings.omega_nonneg) {
        AssertionResult a;
        a.name = "omega_nonnegative";
        a.comparison = ">=";
        a.threshold = 0.0;
        double mn = std::numeric_limits<double>::infinity();
        for (const auto& row : trace.rows) mn = std::min(mn, row.Omega);
        a.measured = mn;
        a.pass = mn >= 0.0;
        a.detail = "minimum of Omega over all logged steps";
        add(std::move(a));
    }

    if (settings.final_errors) {
        AssertionResult a;
        a.name = "final_tracking_error";
        a.comparison = "<=";
        a.threshold = settings.final_eref_tol;
        a.measured = rep.final_eref;
        a.pass = rep.final_eref <= settings.final_eref_tol;
        a.detail = "||e_ref(T)||";
        add(std::move(a));

        AssertionResult b;
        b.name = "final_parameter_error";
        b.comparison = "<=";
        b.threshold = settings.final_theta_tol;
        if (!theta_true) {
            b.enabled = false;
            b.detail = "skipped: no parameter oracle available";
        } else {
            b.measured = rep.final_theta_tilde;
            b.pass = rep.final_theta_tilde <= settings.final_theta_tol;
            b.detail = "||theta_tilde(T)||";
        }
        add(std::move(b));
    }

    if (settings.bounded_xi) {
        AssertionResult a;
        a.name = "xi_bounded";
        a.comparison = "<=";
        a.threshold = std::numeric_limits<double>::infinity();
        if (!theta_true) {
            a.enabled = false;
            a.detail = "skipped: no parameter oracle available";
        } else {
            a.measured = trace.max_xi;
            a.pass = std::isfinite(trace.max_xi);
            a.detail = "max ||xi|| over the run";
        }
        add(std::move(a));
    }

    return rep;
}

std::string report_json(const Report& report) {
    nlohmann::json j;
    j["schema_version"] = Report::schema_version;
    j["summary"] = {
        {"t_e_detected", report.t_e_detected ? nlohmann::json(*report.t_e_detected)
                                             : nlohmann::json(nullptr)},
        {"switch_count", report.switch_count},
        {"max_xi", report.max_xi},
        {"max_Omega", report.max_Omega},
        {"min_Omega_after_te", std::isfinite(report.min_Omega_after_te)
                                   ? nlohmann::json(report.min_Omega_after_te)
                                   : nlohmann::json(nullptr)},
        {"final_eref", report.final_eref},
        {"final_theta_tilde", std::isfinite(report.final_theta_tilde)
                                  ? nlohmann::json(report.final_theta_tilde)
                                  : nlohmann::json(nullptr)},
        {"fitted_slope", report.fitted_slope ? nlohmann::json(*report.fitted_slope)
                                             : nlohmann::json(nullptr)},
    };
    j["warnings"] = report.warnings;
    j["assertions"] = nlohmann::json::array();
    for (const auto& a : report.assertions) {
        nlohmann::json e;
        e["name"] = a.name;
        e["enabled"] = a.enabled;
        e["pass"] = a.pass;
        e["measured"] = std::isfinite(a.measured) ? nlohmann::json(a.measured)
                                                  : nlohmann::json(nullptr);
        e["threshold"] = std::isfinite(a.threshold) ? nlohmann::json(a.threshold)
                                                    : nlohmann::json(nullptr);
        e["comparison"] = a.comparison;
        e["detail"] = a.detail;
        j["assertions"].push_back(std::move(e));
    }
    j["all_pass"] = report.all_pass();
    return j.dump(2) + "\n";
}

void write_report(const Report& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open report output '" + path + "'");
    out << report_json(report);
    if (!out) throw std::runtime_error("write failure on '" + path + "'");
}

}  // namespace dremrac
