#include "dremrac/config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace dremrac {

namespace {

using nlohmann::json;

std::string join_errors(const std::vector<std::string>& errs) {
    std::ostringstream os;
    os << "invalid experiment config (" << errs.size() << " problem"
       << (errs.size() == 1 ? "" : "s") << "):";
    for (const auto& e : errs) os << "\n  - " << e;
    return os.str();
}

struct Loader {
    const json& root;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool has(const json& obj, const char* key) const {
        return obj.is_object() && obj.contains(key);
    }

    Mat matrix(const json& obj, const std::string& where, const char* key) {
        if (!has(obj, key)) {
            errors.push_back(where + ": missing matrix '" + key + "'");
            return Mat();
        }
        const json& v = obj[key];
        if (!v.is_array() || v.empty() || !v[0].is_array()) {
            errors.push_back(where + "." + key + ": expected an array of rows");
            return Mat();
        }
        const int nr = static_cast<int>(v.size());
        const int nc = static_cast<int>(v[0].size());
        Mat m(nr, nc);
        for (int r = 0; r < nr; ++r) {
            if (!v[r].is_array() || static_cast<int>(v[r].size()) != nc) {
                errors.push_back(where + "." + key + ": row " + std::to_string(r + 1) +
                                 " has inconsistent length");
                return Mat();
            }
            for (int c = 0; c < nc; ++c) {
                if (!v[r][c].is_number()) {
                    errors.push_back(where + "." + key + ": non-numeric entry at row " +
                                     std::to_string(r + 1));
                    return Mat();
                }
                m(r, c) = v[r][c].get<double>();
            }
        }
        return m;
    }

    Mat column(const json& obj, const std::string& where, const char* key) {
        if (!has(obj, key)) {
            errors.push_back(where + ": missing vector '" + key + "'");
            return Mat();
        }
        const json& v = obj[key];
        if (!v.is_array() || v.empty() || !v[0].is_number()) {
            errors.push_back(where + "." + key + ": expected an array of numbers");
            return Mat();
        }
        Mat m(static_cast<int>(v.size()), 1);
        for (size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                errors.push_back(where + "." + key + ": non-numeric entry");
                return Mat();
            }
            m[static_cast<int>(i)] = v[i].get<double>();
        }
        return m;
    }

    double number(const json& obj, const std::string& where, const char* key, double fallback,
                  bool warn_on_default) {
        if (!has(obj, key)) {
            if (warn_on_default)
                warnings.push_back(where + "." + key + " not given; default " +
                                   std::to_string(fallback) + " applied");
            return fallback;
        }
        if (!obj[key].is_number()) {
            errors.push_back(where + "." + key + ": expected a number");
            return fallback;
        }
        return obj[key].get<double>();
    }

    bool boolean(const json& obj, const std::string& where, const char* key, bool fallback) {
        if (!has(obj, key)) return fallback;
        if (!obj[key].is_boolean()) {
            errors.push_back(where + "." + key + ": expected a boolean");
            return fallback;
        }
        return obj[key].get<bool>();
    }

    std::vector<RefChannel> channels() {
        std::vector<RefChannel> out;
        if (!has(root, "reference")) {
            errors.push_back("missing 'reference' signal array");
            return out;
        }
        const json& arr = root["reference"];
        if (!arr.is_array() || arr.empty()) {
            errors.push_back("'reference' must be a non-empty array of channel descriptors");
            return out;
        }
        int idx = 0;
        for (const auto& ch : arr) {
            ++idx;
            const std::string where = "reference[" + std::to_string(idx) + "]";
            if (!ch.is_object() || !ch.contains("type") || !ch["type"].is_string()) {
                errors.push_back(where + ": descriptor needs a string 'type'");
                continue;
            }
            const std::string type = ch["type"].get<std::string>();
            if (type == "constant") {
                out.push_back(RefChannel::constant(number(ch, where, "value", 0.0, false)));
            } else if (type == "exp_rise") {
                out.push_back(RefChannel::exp_rise(number(ch, where, "amplitude", 0.0, false),
                                                   number(ch, where, "rate", 1.0, false)));
            } else if (type == "table") {
                RefChannel t;
                t.kind = RefChannel::Kind::table;
                if (!ch.contains("points") || !ch["points"].is_array() || ch["points"].empty()) {
                    errors.push_back(where + ": table channel needs non-empty 'points'");
                    continue;
                }
                double prev_t = -std::numeric_limits<double>::infinity();
                for (const auto& p : ch["points"]) {
                    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                        errors.push_back(where + ": each point must be [t, value]");
                        break;
                    }
                    const double pt = p[0].get<double>();
                    if (pt <= prev_t) {
                        errors.push_back(where + ": point times must be strictly increasing");
                        break;
                    }
                    prev_t = pt;
                    t.table.emplace_back(pt, p[1].get<double>());
                }
                out.push_back(std::move(t));
            } else {
                errors.push_back(where + ": unknown type '" + type +
                                 "' (expected constant | exp_rise | table)");
            }
        }
        return out;
    }
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errs)
    : std::runtime_error(join_errors(errs)), errors(std::move(errs)) {}

ExperimentConfig parse_config(const std::string& json_text, const std::string& origin) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError({origin + ": " + e.what()});
    }
    Loader L{root, {}, {}};
    ExperimentConfig cfg;

    // Plant and reference model.
    Mat A, B, x0, A_ref, B_ref, x0_ref;
    bool oracle = true;
    if (L.has(root, "plant")) {
        const json& p = root["plant"];
        A = L.matrix(p, "plant", "A");
        B = L.matrix(p, "plant", "B");
        x0 = L.column(p, "plant", "x0");
        oracle = L.boolean(p, "plant", "oracle", true);
    } else {
        L.errors.push_back("missing 'plant' section");
    }
    if (L.has(root, "reference_model")) {
        const json& p = root["reference_model"];
        A_ref = L.matrix(p, "reference_model", "A_ref");
        B_ref = L.matrix(p, "reference_model", "B_ref");
        x0_ref = L.column(p, "reference_model", "x0_ref");
    } else {
        L.errors.push_back("missing 'reference_model' section");
    }
    if (L.errors.empty()) {
        try {
            cfg.plant = PlantModel::make(A, B, x0);
        } catch (const std::exception& e) {
            L.errors.push_back(std::string("plant: ") + e.what());
        }
        try {
            cfg.ref = ReferenceModel::make(A_ref, B_ref, x0_ref);
        } catch (const std::exception& e) {
            L.errors.push_back(std::string("reference_model: ") + e.what());
        }
    }

    // Simulation parameters (core tunables warn when defaulted).
    const json sim_obj = L.has(root, "sim") ? root["sim"] : json::object();
    cfg.sim.dt = L.number(sim_obj, "sim", "dt", 1e-4, false);
    cfg.sim.T = L.number(sim_obj, "sim", "T", 20.0, false);
    cfg.sim.filter.l = L.number(sim_obj, "sim", "l", 1.0, true);
    cfg.sim.filter.x0_known = L.boolean(sim_obj, "sim", "x0_known", false);
    cfg.sim.drem.k = L.number(sim_obj, "sim", "k", 10.0, true);
    cfg.sim.drem.scaling = L.number(sim_obj, "sim", "scaling", 1.0, false);
    cfg.sim.memory.sigma = L.number(sim_obj, "sim", "sigma", 0.5, true);
    cfg.sim.gamma0 = L.number(sim_obj, "sim", "gamma0", 1.0, true);
    cfg.sim.gamma1 = L.number(sim_obj, "sim", "gamma1", 10.0, true);
    cfg.sim.epsilon_rel = L.number(sim_obj, "sim", "epsilon_rel", 1e-12, false);
    cfg.sim.fe.alpha = L.number(sim_obj, "sim", "fe_alpha", 1e-12, false);
    cfg.sim.fe.relative = L.boolean(sim_obj, "sim", "fe_relative", false);
    cfg.sim.oracle = oracle;
    cfg.sim.reference = L.channels();

    if (L.has(root, "baseline")) {
        const json& b = root["baseline"];
        cfg.sim.baseline.enabled = L.boolean(b, "baseline", "enabled", false);
        cfg.sim.baseline.gamma = L.number(b, "baseline", "gamma", 1.0, false);
        if (L.has(b, "sign")) {
            const std::string s = b["sign"].is_string() ? b["sign"].get<std::string>() : "";
            if (s == "corrected")
                cfg.sim.baseline.sign = BaselineSign::corrected;
            else if (s == "literal")
                cfg.sim.baseline.sign = BaselineSign::literal;
            else
                L.errors.push_back("baseline.sign: expected 'corrected' or 'literal'");
        }
    }

    if (L.has(root, "theta_hat0")) {
        Mat th = L.matrix(root, "config", "theta_hat0");
        if (th.size() > 0) {
            try {
                cfg.sim.theta_hat0 =
                    ControllerState::make(std::move(th), cfg.plant.n, cfg.plant.m).theta_hat;
            } catch (const std::exception& e) {
                L.errors.push_back(std::string("theta_hat0: ") + e.what());
            }
        }
    }

    if (L.has(root, "output")) {
        const json& o = root["output"];
        if (L.has(o, "trace_csv") && o["trace_csv"].is_string())
            cfg.trace_csv = o["trace_csv"].get<std::string>();
        if (L.has(o, "report_json") && o["report_json"].is_string())
            cfg.report_json = o["report_json"].get<std::string>();
    }

    if (L.has(root, "assertions")) {
        const json& a = root["assertions"];
        auto& s = cfg.assertions;
        s.monotonicity = L.boolean(a, "assertions", "monotonicity", s.monotonicity);
        s.monotonicity_tol =
            L.number(a, "assertions", "monotonicity_tol", s.monotonicity_tol, false);
        s.single_switch = L.boolean(a, "assertions", "single_switch", s.single_switch);
        s.fe_detection = L.boolean(a, "assertions", "fe_detection", s.fe_detection);
        s.fe_band_min = L.number(a, "assertions", "fe_band_min", s.fe_band_min, false);
        s.fe_band_max = L.number(a, "assertions", "fe_band_max", s.fe_band_max, false);
        s.decay_slope = L.boolean(a, "assertions", "decay_slope", s.decay_slope);
        s.slope_margin = L.number(a, "assertions", "slope_margin", s.slope_margin, false);
        s.omega_nonneg = L.boolean(a, "assertions", "omega_nonneg", s.omega_nonneg);
        s.final_errors = L.boolean(a, "assertions", "final_errors", s.final_errors);
        s.final_eref_tol = L.number(a, "assertions", "final_eref_tol", s.final_eref_tol, false);
        s.final_theta_tol =
            L.number(a, "assertions", "final_theta_tol", s.final_theta_tol, false);
        s.bounded_xi = L.boolean(a, "assertions", "bounded_xi", s.bounded_xi);
    }

    // Cross-section consistency and numeric ranges.
    if (L.errors.empty()) {
        if (static_cast<int>(cfg.sim.reference.size()) != cfg.plant.m)
            L.errors.push_back("reference: channel count " +
                               std::to_string(cfg.sim.reference.size()) +
                               " does not match input dimension m = " +
                               std::to_string(cfg.plant.m));
        if (cfg.ref.A_ref.rows() != cfg.plant.n)
            L.errors.push_back("reference_model: A_ref dimension does not match plant");
        if (cfg.ref.B_ref.cols() != cfg.plant.m)
            L.errors.push_back("reference_model: B_ref column count does not match plant");
        try {
            cfg.sim.validate();
        } catch (const std::exception& e) {
            L.errors.push_back(e.what());
        }
    }
    if (!L.errors.empty()) throw ConfigError(std::move(L.errors));
    cfg.warnings = std::move(L.warnings);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path + ": cannot open file"});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

}  // namespace dremrac
