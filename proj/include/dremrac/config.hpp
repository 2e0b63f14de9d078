#pragma once

#include <string>
#include <vector>

#include "dremrac/plant.hpp"
#include "dremrac/sim.hpp"

namespace dremrac {

/// Raised by load_config with every validation problem found, not just the
/// first.
struct ConfigError : std::runtime_error {
    std::vector<std::string> errors;
    explicit ConfigError(std::vector<std::string> errs);
};

/// Post-run assertion toggles and thresholds; each enabled assertion appears
/// in the report with its measured value.
struct AssertionSettings {
    bool monotonicity = true;
    double monotonicity_tol = 1e-9;
    bool single_switch = true;
    bool fe_detection = true;
    double fe_band_min = 0.05;  // s
    double fe_band_max = 0.5;   // s
    bool decay_slope = true;
    double slope_margin = 0.5;  // require fitted slope <= -margin * gamma1
    bool omega_nonneg = true;
    bool final_errors = true;
    double final_eref_tol = 1e-2;
    double final_theta_tol = 1e-3;
    bool bounded_xi = true;
};

struct ExperimentConfig {
    PlantModel plant;
    ReferenceModel ref;
    SimConfig sim;
    AssertionSettings assertions;
    std::string trace_csv = "trace.csv";
    std::string report_json = "report.json";
    std::vector<std::string> warnings;  // defaults applied during load
};

/// Parses and validates a JSON experiment file. Throws ConfigError carrying
/// the full list of problems; missing tunables fall back to their defaults
/// and are reported in warnings.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text, const std::string& origin);

}  // namespace dremrac
