#pragma once

#include <stdexcept>

#include "dremrac/matrix.hpp"

namespace dremrac {

struct ModelError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// True plant x' = A x + B u. Hidden from the controller; only the
/// simulation loop and test oracles may look at A, B, x0.
struct PlantModel {
    Mat A;   // n x n
    Mat B;   // n x m, full column rank
    Mat x0;  // n x 1
    int n = 0;
    int m = 0;

    /// Validates shapes, full column rank of B and controllability of (A, B).
    static PlantModel make(Mat A, Mat B, Mat x0);
};

/// Reference model x_ref' = A_ref x_ref + B_ref r with Hurwitz A_ref.
struct ReferenceModel {
    Mat A_ref;
    Mat B_ref;
    Mat x0_ref;

    /// Validates shapes and that A_ref is Hurwitz (Lyapunov-equation check:
    /// A_ref' P + P A_ref = -I admits a positive definite P).
    static ReferenceModel make(Mat A_ref, Mat B_ref, Mat x0_ref);
};

/// Least-squares matching gains. Test oracle only; the adaptive controller
/// never sees these.
struct IdealGains {
    Mat K_x;          // m x n
    Mat K_r;          // m x m
    double residual;  // ||A + B K_x - A_ref|| + ||B K_r - B_ref||

    /// theta with theta' = [K_x K_r], shape (n+m) x m.
    Mat theta() const { return hstack(K_x, K_r).transposed(); }
};

/// Adjustable controller parameters theta_hat, shape (n+m) x m.
/// theta_hat' = [K_x_hat K_r_hat].
struct ControllerState {
    Mat theta_hat;

    /// Rejects a zero feedforward block K_r_hat(0).
    static ControllerState make(Mat theta_hat, int n, int m);

    /// Default initialization theta_hat' = [0 I].
    static ControllerState default_init(int n, int m);
};

Mat plant_derivative(const PlantModel& model, const Mat& x, const Mat& u);
Mat reference_derivative(const ReferenceModel& model, const Mat& x_ref, const Mat& r);

/// Normal-equation least squares for B K_x = A_ref - A and B K_r = B_ref.
IdealGains ideal_gains(const PlantModel& plant, const ReferenceModel& ref);

/// u = K_x_hat x + K_r_hat r = theta_hat' * [x; r].
Mat control(const ControllerState& ctrl, const Mat& x, const Mat& r);

Mat tracking_error(const Mat& x, const Mat& x_ref);

/// || [e_ref; vec(theta_hat - theta_true)] ||; diagnostic only.
double augmented_error(const Mat& e_ref, const Mat& theta_hat, const Mat& theta_true);

/// True iff the Lyapunov check certifies every eigenvalue of a has negative
/// real part.
bool is_hurwitz(const Mat& a);

/// Rank of [B, AB, ..., A^{n-1}B] equals n.
bool is_controllable(const Mat& a, const Mat& b);

}  // namespace dremrac
