#include "dremrac/plant.hpp"

#include <cmath>

namespace dremrac {

namespace {

constexpr double kRankTol = 1e-10;        // relative, row-echelon rank test
constexpr double kColumnRankTol = 1e-12;  // det(B'B) threshold factor

int echelon_rank(Mat m) {
    const int nr = m.rows();
    const int nc = m.cols();
    const double scale = m.max_abs();
    if (scale == 0.0) return 0;
    int rank = 0;
    int col = 0;
    while (rank < nr && col < nc) {
        int piv = rank;
        double best = std::fabs(m(rank, col));
        for (int r = rank + 1; r < nr; ++r) {
            const double v = std::fabs(m(r, col));
            if (v > best) { best = v; piv = r; }
        }
        if (best <= kRankTol * scale) { ++col; continue; }
        for (int c = 0; c < nc; ++c) std::swap(m(rank, c), m(piv, c));
        for (int r = rank + 1; r < nr; ++r) {
            const double f = m(r, col) / m(rank, col);
            for (int c = col; c < nc; ++c) m(r, c) -= f * m(rank, c);
        }
        ++rank;
        ++col;
    }
    return rank;
}

// Solves a' P + P a = -I via the Kronecker system and reports whether P is
// positive definite (Cholesky pivot positivity).
bool lyapunov_positive_definite(const Mat& a) {
    const int n = a.rows();
    const Mat at = a.transposed();
    // vec(P) column-major; (I (x) a' + a' (x) I) vec(P) = vec(-I).
    Mat sys(n * n, n * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int row = j * n + i;
            for (int k = 0; k < n; ++k) {
                sys(row, j * n + k) += at(i, k);   // I (x) a' term
                sys(row, k * n + i) += at(j, k);   // a' (x) I term
            }
        }
    Mat rhs(n * n, 1);
    for (int i = 0; i < n; ++i) rhs[i * n + i] = -1.0;
    Mat p;
    try {
        p = solve(sys, rhs);
    } catch (const SingularMatrixError&) {
        return false;  // eigenvalue pair summing to zero: not Hurwitz
    }
    Mat P(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) P(i, j) = p[j * n + i];
    // In-place Cholesky; any nonpositive pivot means P is not PD.
    for (int c = 0; c < n; ++c) {
        double d = P(c, c);
        for (int k = 0; k < c; ++k) d -= P(c, k) * P(c, k);
        if (d <= 0.0 || !std::isfinite(d)) return false;
        const double sq = std::sqrt(d);
        P(c, c) = sq;
        for (int r = c + 1; r < n; ++r) {
            double s = 0.5 * (P(r, c) + P(c, r));
            for (int k = 0; k < c; ++k) s -= P(r, k) * P(c, k);
            P(r, c) = s / sq;
        }
    }
    return true;
}

}  // namespace

bool is_hurwitz(const Mat& a) {
    if (a.rows() != a.cols()) throw ModelError("is_hurwitz: square matrix required");
    return lyapunov_positive_definite(a);
}

bool is_controllable(const Mat& a, const Mat& b) {
    const int n = a.rows();
    Mat ctrb = b;
    Mat power = b;
    for (int k = 1; k < n; ++k) {
        power = a * power;
        ctrb = hstack(ctrb, power);
    }
    return echelon_rank(ctrb) == n;
}

PlantModel PlantModel::make(Mat A, Mat B, Mat x0) {
    const int n = A.rows();
    const int m = B.cols();
    if (A.cols() != n) throw ModelError("plant A must be square");
    if (B.rows() != n) throw ModelError("plant B row count must match A");
    if (x0.rows() != n || x0.cols() != 1) throw ModelError("plant x0 must be an n-vector");
    const Mat btb = B.transposed() * B;
    const double scale = std::pow(std::max(B.max_abs(), 1e-300), 2.0 * m);
    if (determinant(btb) <= kColumnRankTol * scale)
        throw ModelError("plant B must have full column rank");
    if (!is_controllable(A, B)) throw ModelError("plant (A, B) must be controllable");
    return PlantModel{std::move(A), std::move(B), std::move(x0), n, m};
}

ReferenceModel ReferenceModel::make(Mat A_ref, Mat B_ref, Mat x0_ref) {
    const int n = A_ref.rows();
    if (A_ref.cols() != n) throw ModelError("reference A_ref must be square");
    if (B_ref.rows() != n) throw ModelError("reference B_ref row count must match A_ref");
    if (x0_ref.rows() != n || x0_ref.cols() != 1)
        throw ModelError("reference x0_ref must be an n-vector");
    if (!is_hurwitz(A_ref)) throw ModelError("reference A_ref must be Hurwitz");
    return ReferenceModel{std::move(A_ref), std::move(B_ref), std::move(x0_ref)};
}

ControllerState ControllerState::make(Mat theta_hat, int n, int m) {
    if (theta_hat.rows() != n + m || theta_hat.cols() != m)
        throw ModelError("theta_hat must be (n+m) x m");
    const Mat kr_block = theta_hat.block(n, 0, m, m);
    if (kr_block.max_abs() == 0.0)
        throw ModelError("feedforward block K_r_hat(0) must be nonzero");
    return ControllerState{std::move(theta_hat)};
}

ControllerState ControllerState::default_init(int n, int m) {
    Mat th(n + m, m);
    for (int i = 0; i < m; ++i) th(n + i, i) = 1.0;
    return ControllerState{std::move(th)};
}

Mat plant_derivative(const PlantModel& model, const Mat& x, const Mat& u) {
    if (x.rows() != model.n || u.rows() != model.m)
        throw DimensionError("plant_derivative: state/control dimension mismatch");
    return model.A * x + model.B * u;
}

Mat reference_derivative(const ReferenceModel& model, const Mat& x_ref, const Mat& r) {
    if (x_ref.rows() != model.A_ref.rows() || r.rows() != model.B_ref.cols())
        throw DimensionError("reference_derivative: dimension mismatch");
    return model.A_ref * x_ref + model.B_ref * r;
}

IdealGains ideal_gains(const PlantModel& plant, const ReferenceModel& ref) {
    const Mat bt = plant.B.transposed();
    const Mat btb = bt * plant.B;
    Mat kx, kr;
    try {
        kx = solve(btb, bt * (ref.A_ref - plant.A));
        kr = solve(btb, bt * ref.B_ref);
    } catch (const SingularMatrixError&) {
        throw ModelError("ideal_gains: B is rank deficient");
    }
    const double residual =
        (plant.A + plant.B * kx - ref.A_ref).norm() + (plant.B * kr - ref.B_ref).norm();
    return IdealGains{std::move(kx), std::move(kr), residual};
}

Mat control(const ControllerState& ctrl, const Mat& x, const Mat& r) {
    if (x.rows() + r.rows() != ctrl.theta_hat.rows())
        throw DimensionError("control: [x; r] dimension mismatch with theta_hat");
    return ctrl.theta_hat.transposed() * vstack(x, r);
}

Mat tracking_error(const Mat& x, const Mat& x_ref) {
    if (x.rows() != x_ref.rows()) throw DimensionError("tracking_error: dimension mismatch");
    return x - x_ref;
}

double augmented_error(const Mat& e_ref, const Mat& theta_hat, const Mat& theta_true) {
    const Mat dtheta = theta_hat - theta_true;
    return std::sqrt(e_ref.norm() * e_ref.norm() + dtheta.norm() * dtheta.norm());
}

}  // namespace dremrac
