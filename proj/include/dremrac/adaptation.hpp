#pragma once

#include "dremrac/matrix.hpp"

namespace dremrac {

/// Configuration of the memory operator exp(-sigma t)/p applied to the scalar
/// regression. sigma > 0 trades excitation retention against forcing decay.
struct MemoryConfig {
    double sigma = 0.5;
};

/// Memory-operator state:
///   Omega'   = -sigma Omega   + exp(-sigma t) Delta^2
///   Upsilon' = -sigma Upsilon + exp(-sigma t) Delta y_theta
/// so Upsilon = Omega theta holds along trajectories. Omega is nondecreasing-
/// in-information: once positive it never returns to zero in finite time.
struct MemoryState {
    double Omega = 0.0;
    Mat Upsilon;  // (n+m) x m
    double t = 0.0;

    static MemoryState zero(int n_plus_m, int m) {
        return MemoryState{0.0, Mat(n_plus_m, m), 0.0};
    }
};

struct MemoryDerivative {
    double dOmega;
    Mat dUpsilon;
};

MemoryDerivative memory_derivative(const MemoryState& state, double Delta, const Mat& y_theta,
                                   const MemoryConfig& cfg);

/// One RK4 step with Delta, y_theta held constant; the exp(-sigma t) weight is
/// evaluated at the stage times.
MemoryState memory_step(const MemoryState& state, double Delta, const Mat& y_theta,
                        const MemoryConfig& cfg, double dt);

/// Switched gain schedule: zero until Omega clears the excitation threshold,
/// then gamma = (gamma0 ||omega||^2 + gamma1) / Omega^2, which makes the
/// parameter-error contraction rate at least gamma1.
struct GainSchedule {
    double gamma0 = 1.0;
    double gamma1 = 10.0;
    double epsilon = 0.0;  // excitation threshold on Omega
};

double gain(const GainSchedule& sched, double Omega, const Mat& omega_reg);

/// theta_hat' = -gamma Omega (Omega theta_hat - Upsilon), RK4 with the
/// regression quantities held constant over the step.
Mat adapt_step(const Mat& theta_hat, double gamma_val, double Omega, const Mat& Upsilon,
               double dt);

/// Sign convention for the memoryless comparison law. The corrected form
/// contracts the parameter error; the literal form reverses the feedback sign
/// and is retained to demonstrate its divergence.
enum class BaselineSign { corrected, literal };

/// theta_hat' = -gamma Delta (Delta theta_hat - y_theta)  (corrected), or
/// theta_hat' = -gamma Delta (y_theta - Delta theta_hat)  (literal).
Mat baseline_adapt_step(const Mat& theta_hat, double gamma_const, double Delta,
                        const Mat& y_theta, BaselineSign sign, double dt);

}  // namespace dremrac
