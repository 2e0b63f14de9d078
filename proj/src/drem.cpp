#include "dremrac/drem.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace dremrac {

namespace {

// LDL' with symmetric diagonal pivoting, specialized to matrices that are
// positive semidefinite in exact arithmetic (filtered Gramians). Any
// nonpositive pivot is numerical rank deficiency, reported as det = 0 rather
// than as a signed roundoff artifact.
struct PsdFactors {
    Mat ldl;                // packed unit-L and pivots d_i on the diagonal
    std::vector<int> perm;  // symmetric permutation
    bool deficient = false;
};

PsdFactors psd_factor(const Mat& m) {
    const int n = m.rows();
    PsdFactors f;
    f.ldl = m;
    f.perm.resize(n);
    for (int i = 0; i < n; ++i) f.perm[i] = i;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        double best = f.ldl(c, c);
        for (int r = c + 1; r < n; ++r)
            if (f.ldl(r, r) > best) { best = f.ldl(r, r); piv = r; }
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(f.ldl(c, j), f.ldl(piv, j));
            for (int j = 0; j < n; ++j) std::swap(f.ldl(j, c), f.ldl(j, piv));
            std::swap(f.perm[c], f.perm[piv]);
        }
        const double d = f.ldl(c, c);
        if (d <= 0.0 || !std::isfinite(d)) { f.deficient = true; return f; }
        for (int r = c + 1; r < n; ++r) {
            const double l = f.ldl(r, c) / d;
            for (int j = c + 1; j <= r; ++j) f.ldl(r, j) -= l * f.ldl(c, j);
            f.ldl(r, c) = l;
        }
        // Keep the upper triangle mirrored so later diagonal pivot swaps see
        // the updated values on both sides.
        for (int r = c + 1; r < n; ++r)
            for (int j = r + 1; j < n; ++j) f.ldl(r, j) = f.ldl(j, r);
    }
    return f;
}

double psd_det(const PsdFactors& f) {
    if (f.deficient) return 0.0;
    double d = 1.0;
    for (int i = 0; i < f.ldl.rows(); ++i) d *= f.ldl(i, i);
    return d;
}

// Solves m * x = b given m = P' L D L' P.
Mat psd_solve_once(const PsdFactors& f, const Mat& b) {
    const int n = f.ldl.rows();
    Mat x(n, b.cols());
    for (int col = 0; col < b.cols(); ++col) {
        std::vector<double> y(n);
        for (int i = 0; i < n; ++i) {
            double s = b(f.perm[i], col);
            for (int j = 0; j < i; ++j) s -= f.ldl(i, j) * y[j];
            y[i] = s;
        }
        for (int i = 0; i < n; ++i) y[i] /= f.ldl(i, i);
        for (int i = n - 1; i >= 0; --i) {
            double s = y[i];
            for (int j = i + 1; j < n; ++j) s -= f.ldl(j, i) * y[j];
            y[i] = s;
        }
        for (int i = 0; i < n; ++i) x(f.perm[i], col) = y[i];
    }
    return x;
}

// Iterative refinement with extended-precision residuals. The Gramian systems
// solved here have right-hand sides that lie in the range of the matrix up to
// roundoff, so refining against a quad-precision residual recovers most of the
// accuracy an ill-conditioned F would otherwise forfeit.
Mat psd_solve(const PsdFactors& f, const Mat& m, const Mat& b) {
    Mat x = psd_solve_once(f, b);
    const int n = m.rows();
    for (int pass = 0; pass < 3; ++pass) {
        Mat resid(n, b.cols());
        for (int col = 0; col < b.cols(); ++col)
            for (int i = 0; i < n; ++i) {
                __float128 s = b(i, col);
                for (int k = 0; k < n; ++k)
                    s -= static_cast<__float128>(m(i, k)) * static_cast<__float128>(x(k, col));
                resid(i, col) = static_cast<double>(s);
            }
        if (resid.max_abs() == 0.0) break;
        x += psd_solve_once(f, resid);
    }
    return x;
}

}  // namespace

DremDerivative drem_derivative(const DremState& state, const Mat& phi_bar, const Mat& z_bar,
                               const DremConfig& cfg) {
    if (phi_bar.cols() != 1 || z_bar.cols() != 1)
        throw DimensionError("drem_derivative: regressor and output must be column vectors");
    if (state.F.rows() != phi_bar.rows() || state.G.cols() != z_bar.rows())
        throw DimensionError("drem_derivative: state dimension mismatch");
    const Mat phi_s = cfg.scaling * phi_bar;
    const Mat z_s = cfg.scaling * z_bar;
    return DremDerivative{phi_s * phi_s.transposed() - cfg.k * state.F,
                          phi_s * z_s.transposed() - cfg.k * state.G};
}

DremState drem_step(const DremState& state, const Mat& phi_bar, const Mat& z_bar,
                    const DremConfig& cfg, double dt) {
    const auto k1 = drem_derivative(state, phi_bar, z_bar, cfg);
    const DremState s2{state.F + (dt / 2.0) * k1.dF, state.G + (dt / 2.0) * k1.dG};
    const auto k2 = drem_derivative(s2, phi_bar, z_bar, cfg);
    const DremState s3{state.F + (dt / 2.0) * k2.dF, state.G + (dt / 2.0) * k2.dG};
    const auto k3 = drem_derivative(s3, phi_bar, z_bar, cfg);
    const DremState s4{state.F + dt * k3.dF, state.G + dt * k3.dG};
    const auto k4 = drem_derivative(s4, phi_bar, z_bar, cfg);
    DremState next{state.F + (dt / 6.0) * (k1.dF + 2.0 * k2.dF + 2.0 * k3.dF + k4.dF),
                   state.G + (dt / 6.0) * (k1.dG + 2.0 * k2.dG + 2.0 * k3.dG + k4.dG)};
    for (int i = 0; i < next.F.rows(); ++i)
        for (int j = i + 1; j < next.F.cols(); ++j) {
            const double avg = 0.5 * (next.F(i, j) + next.F(j, i));
            next.F(i, j) = avg;
            next.F(j, i) = avg;
        }
    return next;
}

MixResult mix(const DremState& state) {
    const PsdFactors f = psd_factor(state.F);
    const double phi = psd_det(f);
    if (phi > 0.0) {
        Mat z = psd_solve(f, state.F, state.G);
        z *= phi;
        return MixResult{std::move(z), phi};
    }
    // Rank-deficient (or underflowed) Gramian: adj(F) G remains well defined
    // and the downstream regression carries phi = 0.
    return MixResult{adjugate(state.F) * state.G, 0.0};
}

Extracted extract(const Mat& z, int n, int m) {
    if (z.rows() < n + m || z.cols() != n)
        throw DimensionError("extract: z must have at least n+m rows and exactly n columns");
    return Extracted{z.block(0, 0, n, n).transposed(), z.block(n, 0, m, n).transposed()};
}

ControllerRegression controller_regression(const Mat& z_A, const Mat& z_B, double phi,
                                           const ReferenceModel& ref) {
    const int n = z_A.rows();
    const int m = z_B.cols();
    if (z_A.cols() != n || z_B.rows() != n)
        throw DimensionError("controller_regression: z_A must be n x n, z_B n x m");
    if (ref.A_ref.rows() != n || ref.B_ref.cols() != m)
        throw DimensionError("controller_regression: reference model dimension mismatch");

    const Mat y_bar = hstack(phi * ref.A_ref - z_A, phi * ref.B_ref).transposed();
    const Mat gram = z_B.transposed() * z_B;
    const double Delta = psd_det(psd_factor(gram));
    // y_theta' = adj(gram) z_B' y_bar', evaluated right to left.
    Mat y_theta = y_bar * z_B * adjugate(gram);
    return ControllerRegression{Delta, std::move(y_theta), y_bar};
}

}  // namespace dremrac
