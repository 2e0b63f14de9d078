#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dremrac/adaptation.hpp"
#include "dremrac/drem.hpp"
#include "dremrac/matrix.hpp"
#include "dremrac/parametrization.hpp"
#include "dremrac/plant.hpp"

namespace dremrac {

/// Reference signal, one descriptor per input channel.
struct RefChannel {
    enum class Kind { constant, exp_rise, table };
    Kind kind = Kind::constant;
    double c = 0.0;  // constant value, or amplitude of c*(1 - exp(-a t))
    double a = 0.0;  // rise rate for exp_rise
    std::vector<std::pair<double, double>> table;  // (t, value), linearly interpolated

    static RefChannel constant(double value);
    static RefChannel exp_rise(double amplitude, double rate);
};

Mat eval_reference(const std::vector<RefChannel>& channels, double t);

/// Finite-excitation monitor: trapezoid accumulation of the Gramian of a
/// designated scalar or vector signal; detection at the first time the
/// Gramian's minimum eigenvalue reaches alpha.
struct FeConfig {
    double alpha = 1e-12;
    bool relative = false;  // threshold against alpha * running max of the integrand
};

struct FeMonitor {
    Mat gramian;                        // d x d (1 x 1 for scalar signals)
    std::optional<double> t_e_detected;
    FeConfig cfg;
    bool has_prev = false;
    Mat prev_outer;                     // previous integrand sample
    double peak_integrand = 0.0;        // running max of ||sample sample'||

    static FeMonitor make(int dim, FeConfig cfg);
};

/// Trapezoid-rule Gramian update; sets t_e_detected when the threshold is
/// first met at time t.
void fe_check(FeMonitor& monitor, const Mat& sample, double t, double dt);

/// Sign selection and gain for the memoryless comparison estimator.
struct BaselineConfig {
    bool enabled = false;
    double gamma = 1.0;
    BaselineSign sign = BaselineSign::corrected;
};

struct SimConfig {
    double dt = 1e-4;
    double T = 20.0;
    FilterConfig filter;
    DremConfig drem;
    MemoryConfig memory;
    double gamma0 = 1.0;
    double gamma1 = 10.0;
    double epsilon_rel = 1e-12;  // excitation threshold: eps = epsilon_rel * (1 + max Omega)
    FeConfig fe;
    std::vector<RefChannel> reference;
    BaselineConfig baseline;
    std::optional<Mat> theta_hat0;  // default: [0 I]'
    bool oracle = true;             // plant parameters may back oracle trace columns

    void validate() const;  // throws ModelError on inconsistency
};

/// One logged integrator step. Oracle-backed entries (theta_tilde_norm,
/// xi_norm) are NaN when the plant is declared external.
struct TraceRow {
    double t = 0.0;
    Mat x;
    Mat x_ref;
    Mat u;
    double eref_norm = 0.0;
    double Delta = 0.0;
    double Omega = 0.0;
    double gamma = 0.0;
    Mat theta_hat;
    double theta_tilde_norm = 0.0;
    double xi_norm = 0.0;
    int switch_flag = 0;  // 1 exactly on the step where the gain branch activates
};

struct SimTrace {
    std::vector<TraceRow> rows;
    int n = 0;
    int m = 0;
    bool oracle = false;
    std::optional<double> t_e_detected;
    int switch_count = 0;
    double max_xi = 0.0;     // NaN-free only with oracle
    double max_Omega = 0.0;
    double min_Omega_after_te = 0.0;
};

/// Raised when a state leaves the finite range; names the first offending
/// signal and the time of the failed step.
struct DivergenceError : std::runtime_error {
    std::string signal;
    double time;
    DivergenceError(std::string sig, double t);
};

/// Everything the integrator saw at the end of a step; consumed by test
/// oracles through the observer callback.
struct StepInternals {
    double t;
    const Mat& x;
    const Mat& x_ref;
    const Mat& u;
    const Mat& phi_bar_ext;  // extended regressor
    const Mat& z_bar;
    const Mat& z;
    double phi;
    const Mat& z_A;
    const Mat& z_B;
    double Delta;
    const Mat& y_theta;
    double Omega;
    const Mat& Upsilon;
    double gamma;
    const Mat& theta_hat;
};

using StepObserver = std::function<void(const StepInternals&)>;

/// Closed-loop run: one monolithic RK4 vector field over plant, reference
/// model, filter, extension, memory, and controller states. Deterministic;
/// identical inputs give identical traces.
SimTrace run(const SimConfig& cfg, const PlantModel& plant, const ReferenceModel& ref,
             const StepObserver& observer = nullptr);

/// Runs the regression pipeline once and both adaptive laws against it: the
/// returned pair is (memory law trace, memoryless law trace). The comparison
/// estimator observes the same Delta, y_theta stream, so the two traces carry
/// identical regression columns by construction.
struct ComparisonResult {
    SimTrace memory_law;
    SimTrace memoryless_law;
};

ComparisonResult compare_laws(const SimConfig& cfg, const PlantModel& plant,
                              const ReferenceModel& ref);

}  // namespace dremrac
