#include "dremrac/parametrization.hpp"

#include <cmath>

namespace dremrac {

Mat filter_derivative(const FilterState& state, const Mat& Phi, const FilterConfig& cfg) {
    return Phi - cfg.l * state.phi_bar;
}

FilterState filter_step(const FilterState& state, const Mat& Phi, const FilterConfig& cfg, double dt) {
    FilterState s = state;
    const Mat k1 = filter_derivative(s, Phi, cfg);
    FilterState s2{state.phi_bar + (dt / 2.0) * k1, state.t + dt / 2.0};
    const Mat k2 = filter_derivative(s2, Phi, cfg);
    FilterState s3{state.phi_bar + (dt / 2.0) * k2, state.t + dt / 2.0};
    const Mat k3 = filter_derivative(s3, Phi, cfg);
    FilterState s4{state.phi_bar + dt * k3, state.t + dt};
    const Mat k4 = filter_derivative(s4, Phi, cfg);
    s.phi_bar += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    s.t += dt;
    return s;
}

Mat z_bar(const FilterState& state, const Mat& x, const FilterConfig& cfg) {
    const int n = x.rows();
    Mat z(n, 1);
    for (int i = 0; i < n; ++i) z[i] = x[i] - cfg.l * state.phi_bar[i];
    return z;
}

Mat z_bar_known_x0(const FilterState& state, const Mat& x, const Mat& x0, const FilterConfig& cfg) {
    Mat z = z_bar(state, x, cfg);
    const double decay = std::exp(-cfg.l * std::max(state.t, 0.0));
    for (int i = 0; i < x.rows(); ++i) z[i] -= decay * x0[i];
    return z;
}

Mat extended_regressor(const FilterState& state, const FilterConfig& cfg) {
    if (cfg.x0_known) return state.phi_bar;
    const int nm = state.phi_bar.rows();
    Mat reg(nm + 1, 1);
    for (int i = 0; i < nm; ++i) reg[i] = state.phi_bar[i];
    reg[nm] = std::exp(-cfg.l * std::max(state.t, 0.0));
    return reg;
}

}  // namespace dremrac
