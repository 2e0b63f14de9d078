#pragma once

#include "dremrac/matrix.hpp"

namespace dremrac {

/// Stable-filter configuration. x0_known selects the reduced parametrization
/// where the regressor drops the exp(-l t) entry and the measured output is
/// corrected by the known initial condition.
struct FilterConfig {
    double l = 1.0;
    bool x0_known = false;
};

/// State of the low-pass filter on the stacked signal Phi = [x; u].
struct FilterState {
    Mat phi_bar;    // (n+m) x 1, starts at zero
    double t = 0.0;

    static FilterState zero(int n_plus_m) { return FilterState{Mat(n_plus_m, 1), 0.0}; }
};

/// phi_bar' = -l phi_bar + Phi.
Mat filter_derivative(const FilterState& state, const Mat& Phi, const FilterConfig& cfg);

/// One classical RK4 step with Phi held constant over the step.
FilterState filter_step(const FilterState& state, const Mat& Phi, const FilterConfig& cfg, double dt);

/// Measurable regression output z_bar = x - l x_bar, with x_bar the first n
/// filter components. In known-x0 mode the exp(-l t) x0 term is removed so the
/// reduced parameter matrix [A B]' carries the regression.
Mat z_bar(const FilterState& state, const Mat& x, const FilterConfig& cfg);
Mat z_bar_known_x0(const FilterState& state, const Mat& x, const Mat& x0, const FilterConfig& cfg);

/// Extended regressor: [phi_bar; exp(-l t)] (dim n+m+1), or phi_bar alone in
/// known-x0 mode (dim n+m).
Mat extended_regressor(const FilterState& state, const FilterConfig& cfg);

}  // namespace dremrac
