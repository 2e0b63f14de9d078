#include "dremrac/adaptation.hpp"

#include <cmath>

namespace dremrac {

MemoryDerivative memory_derivative(const MemoryState& state, double Delta, const Mat& y_theta,
                                   const MemoryConfig& cfg) {
    if (state.Upsilon.rows() != y_theta.rows() || state.Upsilon.cols() != y_theta.cols())
        throw DimensionError("memory_derivative: Upsilon/y_theta shape mismatch");
    const double w = std::exp(-cfg.sigma * std::max(state.t, 0.0));
    return MemoryDerivative{-cfg.sigma * state.Omega + w * Delta * Delta,
                            (w * Delta) * y_theta - cfg.sigma * state.Upsilon};
}

MemoryState memory_step(const MemoryState& state, double Delta, const Mat& y_theta,
                        const MemoryConfig& cfg, double dt) {
    const auto k1 = memory_derivative(state, Delta, y_theta, cfg);
    const MemoryState s2{state.Omega + (dt / 2.0) * k1.dOmega,
                         state.Upsilon + (dt / 2.0) * k1.dUpsilon, state.t + dt / 2.0};
    const auto k2 = memory_derivative(s2, Delta, y_theta, cfg);
    const MemoryState s3{state.Omega + (dt / 2.0) * k2.dOmega,
                         state.Upsilon + (dt / 2.0) * k2.dUpsilon, state.t + dt / 2.0};
    const auto k3 = memory_derivative(s3, Delta, y_theta, cfg);
    const MemoryState s4{state.Omega + dt * k3.dOmega, state.Upsilon + dt * k3.dUpsilon,
                         state.t + dt};
    const auto k4 = memory_derivative(s4, Delta, y_theta, cfg);
    return MemoryState{
        state.Omega + (dt / 6.0) * (k1.dOmega + 2.0 * k2.dOmega + 2.0 * k3.dOmega + k4.dOmega),
        state.Upsilon +
            (dt / 6.0) * (k1.dUpsilon + 2.0 * k2.dUpsilon + 2.0 * k3.dUpsilon + k4.dUpsilon),
        state.t + dt};
}

double gain(const GainSchedule& sched, double Omega, const Mat& omega_reg) {
    if (Omega <= sched.epsilon) return 0.0;
    const double n2 = omega_reg.norm() * omega_reg.norm();  // lambda_max(omega omega')
    return (sched.gamma0 * n2 + sched.gamma1) / (Omega * Omega);
}

namespace {

// Shared RK4 driver for theta_hat' = a * theta_hat + c with constant a, c.
Mat linear_rk4(const Mat& theta_hat, double a, const Mat& c, double dt) {
    const Mat k1 = a * theta_hat + c;
    const Mat k2 = a * (theta_hat + (dt / 2.0) * k1) + c;
    const Mat k3 = a * (theta_hat + (dt / 2.0) * k2) + c;
    const Mat k4 = a * (theta_hat + dt * k3) + c;
    return theta_hat + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Mat adapt_step(const Mat& theta_hat, double gamma_val, double Omega, const Mat& Upsilon,
               double dt) {
    if (theta_hat.rows() != Upsilon.rows() || theta_hat.cols() != Upsilon.cols())
        throw DimensionError("adapt_step: theta_hat/Upsilon shape mismatch");
    if (gamma_val == 0.0) return theta_hat;
    const double a = -gamma_val * Omega * Omega;
    const Mat c = (gamma_val * Omega) * Upsilon;
    return linear_rk4(theta_hat, a, c, dt);
}

Mat baseline_adapt_step(const Mat& theta_hat, double gamma_const, double Delta,
                        const Mat& y_theta, BaselineSign sign, double dt) {
    if (theta_hat.rows() != y_theta.rows() || theta_hat.cols() != y_theta.cols())
        throw DimensionError("baseline_adapt_step: theta_hat/y_theta shape mismatch");
    const double flip = (sign == BaselineSign::corrected) ? 1.0 : -1.0;
    const double a = -flip * gamma_const * Delta * Delta;
    const Mat c = (flip * gamma_const * Delta) * y_theta;
    return linear_rk4(theta_hat, a, c, dt);
}

}  // namespace dremrac
