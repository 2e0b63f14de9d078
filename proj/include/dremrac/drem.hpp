#pragma once

#include "dremrac/matrix.hpp"
#include "dremrac/plant.hpp"

namespace dremrac {

/// Configuration of the regression-extension operator 1/(p+k) and of the
/// optional regressor scaling applied before it. Scaling multiplies the
/// scalar regressor by s^(2q) without moving the regression's solution; it
/// exists because the determinant of a filtered q x q Gramian can underflow
/// for benign signals.
struct DremConfig {
    double k = 10.0;
    double scaling = 1.0;
};

/// Filtered Gramian F and cross term G:
///   F' = -k F + phi_bar phi_bar',   G' = -k G + phi_bar z_bar'.
/// F is re-symmetrized after every step; with zero initial state it stays
/// positive semidefinite.
struct DremState {
    Mat F;  // q x q
    Mat G;  // q x n

    static DremState zero(int q, int n) { return DremState{Mat(q, q), Mat(q, n)}; }
};

struct DremDerivative {
    Mat dF;
    Mat dG;
};

DremDerivative drem_derivative(const DremState& state, const Mat& phi_bar, const Mat& z_bar,
                               const DremConfig& cfg);

/// One RK4 step with phi_bar, z_bar held constant; re-symmetrizes F.
DremState drem_step(const DremState& state, const Mat& phi_bar, const Mat& z_bar,
                    const DremConfig& cfg, double dt);

struct MixResult {
    Mat z;       // q x n
    double phi;  // det of the filtered Gramian, >= 0
};

/// z = adj(F) G, phi = det(F). Uses a symmetric pivoted factorization so that
/// phi of the PSD Gramian never goes negative from roundoff; a Gramian that is
/// singular at working precision yields phi = 0 and the cofactor adjugate.
MixResult mix(const DremState& state);

struct Extracted {
    Mat z_A;  // n x n
    Mat z_B;  // n x m
};

/// Selector application: z_A from the first n rows of z, z_B from the next m.
Extracted extract(const Mat& z, int n, int m);

struct ControllerRegression {
    double Delta;  // det(z_B' z_B) >= 0
    Mat y_theta;   // (n+m) x m
    Mat y_bar;     // (n+m) x n intermediate, kept for diagnostics
};

/// Builds the scalar-regressor controller regression y_theta = Delta * theta.
ControllerRegression controller_regression(const Mat& z_A, const Mat& z_B, double phi,
                                           const ReferenceModel& ref);

}  // namespace dremrac
