#include "dremrac/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dremrac {

namespace {

// Fixed kernel tolerances; deterministic by construction.
constexpr double kSingularPivotTol = 1e-13;   // relative to row scale
constexpr double kSymmetryTol = 1e-9;         // relative to ||m||
constexpr double kJacobiOffTol = 1e-14;       // relative off-diagonal mass

void require(bool ok, const char* msg) {
    if (!ok) throw DimensionError(msg);
}

struct LuFactors {
    Mat lu;                 // packed L (unit diagonal) and U
    std::vector<int> perm;  // row permutation
    double det_sign = 1.0;
    bool singular = false;
    double min_pivot = std::numeric_limits<double>::infinity();
};

LuFactors lu_factor(const Mat& m) {
    const int n = m.rows();
    LuFactors f;
    f.lu = m;
    f.perm.resize(n);
    for (int i = 0; i < n; ++i) f.perm[i] = i;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        double best = std::fabs(f.lu(c, c));
        for (int r = c + 1; r < n; ++r) {
            const double v = std::fabs(f.lu(r, c));
            if (v > best) { best = v; piv = r; }
        }
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(f.lu(c, j), f.lu(piv, j));
            std::swap(f.perm[c], f.perm[piv]);
            f.det_sign = -f.det_sign;
        }
        const double p = f.lu(c, c);
        f.min_pivot = std::min(f.min_pivot, std::fabs(p));
        if (p == 0.0) { f.singular = true; continue; }
        for (int r = c + 1; r < n; ++r) {
            const double factor = f.lu(r, c) / p;
            f.lu(r, c) = factor;
            for (int j = c + 1; j < n; ++j) f.lu(r, j) -= factor * f.lu(c, j);
        }
    }
    return f;
}

double lu_det(const LuFactors& f) {
    if (f.singular) return 0.0;
    double d = f.det_sign;
    for (int i = 0; i < f.lu.rows(); ++i) d *= f.lu(i, i);
    return d;
}

// Forward/back substitution for one right-hand side already permuted in.
Mat lu_solve(const LuFactors& f, const Mat& b) {
    const int n = f.lu.rows();
    Mat x(n, b.cols());
    for (int col = 0; col < b.cols(); ++col) {
        std::vector<double> y(n);
        for (int i = 0; i < n; ++i) {
            double s = b(f.perm[i], col);
            for (int j = 0; j < i; ++j) s -= f.lu(i, j) * y[j];
            y[i] = s;
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = y[i];
            for (int j = i + 1; j < n; ++j) s -= f.lu(i, j) * x(j, col);
            x(i, col) = s / f.lu(i, i);
        }
    }
    return x;
}

// Cofactor route: adj(m)_{ij} = (-1)^{i+j} det(minor with row j, col i removed).
// Only used when LU meets an exactly vanishing pivot; cost is acceptable for
// the small dimensions this library targets.
Mat adjugate_cofactor(const Mat& m) {
    const int n = m.rows();
    Mat adj(n, n);
    if (n == 1) { adj(0, 0) = 1.0; return adj; }
    Mat minor(n - 1, n - 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            int mr = 0;
            for (int r = 0; r < n; ++r) {
                if (r == j) continue;
                int mc = 0;
                for (int c = 0; c < n; ++c) {
                    if (c == i) continue;
                    minor(mr, mc++) = m(r, c);
                }
                ++mr;
            }
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            adj(i, j) = sign * determinant(minor);
        }
    }
    return adj;
}

}  // namespace

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const int nr = static_cast<int>(rows.size());
    const int nc = nr > 0 ? static_cast<int>(rows.begin()->size()) : 0;
    Mat m(nr, nc);
    int r = 0;
    for (const auto& row : rows) {
        require(static_cast<int>(row.size()) == nc, "ragged row in matrix literal");
        int c = 0;
        for (double v : row) m(r, c++) = v;
        ++r;
    }
    return m;
}

Mat Mat::col_vec(std::initializer_list<double> entries) {
    Mat v(static_cast<int>(entries.size()), 1);
    int i = 0;
    for (double e : entries) v[i++] = e;
    return v;
}

Mat Mat::col_vec(const std::vector<double>& entries) {
    Mat v(static_cast<int>(entries.size()), 1);
    for (size_t i = 0; i < entries.size(); ++i) v[static_cast<int>(i)] = entries[i];
    return v;
}

Mat Mat::transposed() const {
    Mat t(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Mat Mat::block(int r0, int c0, int nrows, int ncols) const {
    require(r0 >= 0 && c0 >= 0 && r0 + nrows <= rows_ && c0 + ncols <= cols_,
            "block out of range");
    Mat b(nrows, ncols);
    for (int r = 0; r < nrows; ++r)
        for (int c = 0; c < ncols; ++c) b(r, c) = (*this)(r0 + r, c0 + c);
    return b;
}

double Mat::norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double Mat::max_abs() const {
    double s = 0.0;
    for (double v : data_) s = std::max(s, std::fabs(v));
    return s;
}

bool Mat::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Mat& Mat::operator+=(const Mat& o) {
    require(rows_ == o.rows_ && cols_ == o.cols_, "shape mismatch in +");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Mat& Mat::operator-=(const Mat& o) {
    require(rows_ == o.rows_ && cols_ == o.cols_, "shape mismatch in -");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

Mat& Mat::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Mat operator+(Mat a, const Mat& b) { a += b; return a; }
Mat operator-(Mat a, const Mat& b) { a -= b; return a; }
Mat operator*(double s, Mat a) { a *= s; return a; }
Mat operator*(Mat a, double s) { a *= s; return a; }

Mat operator*(const Mat& a, const Mat& b) {
    require(a.cols() == b.rows(), "shape mismatch in matrix product");
    Mat c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

Mat vstack(const Mat& a, const Mat& b) {
    require(a.cols() == b.cols(), "column mismatch in vstack");
    Mat m(a.rows() + b.rows(), a.cols());
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) m(r, c) = a(r, c);
    for (int r = 0; r < b.rows(); ++r)
        for (int c = 0; c < b.cols(); ++c) m(a.rows() + r, c) = b(r, c);
    return m;
}

Mat hstack(const Mat& a, const Mat& b) {
    require(a.rows() == b.rows(), "row mismatch in hstack");
    Mat m(a.rows(), a.cols() + b.cols());
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c < a.cols(); ++c) m(r, c) = a(r, c);
        for (int c = 0; c < b.cols(); ++c) m(r, a.cols() + c) = b(r, c);
    }
    return m;
}

double determinant(const Mat& m) {
    require(m.rows() == m.cols(), "determinant requires a square matrix");
    require(m.rows() >= 1, "determinant of empty matrix");
    const int n = m.rows();
    if (n == 1) return m(0, 0);
    if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return lu_det(lu_factor(m));
}

Mat adjugate(const Mat& m) {
    require(m.rows() == m.cols(), "adjugate requires a square matrix");
    require(m.rows() >= 1, "adjugate of empty matrix");
    const int n = m.rows();
    if (n == 1) { Mat a(1, 1); a(0, 0) = 1.0; return a; }
    const LuFactors f = lu_factor(m);
    if (f.singular || f.min_pivot == 0.0) return adjugate_cofactor(m);
    // adj = det(m) * m^{-1}; accurate whenever the factorization succeeds,
    // since errors in det and inverse track the same pivots.
    const double det = lu_det(f);
    Mat adj = lu_solve(f, Mat::identity(n));
    adj *= det;
    return adj;
}

Mat solve(const Mat& a, const Mat& b) {
    require(a.rows() == a.cols(), "solve requires a square coefficient matrix");
    require(a.rows() == b.rows(), "right-hand side row count mismatch");
    const LuFactors f = lu_factor(a);
    const double scale = a.max_abs();
    if (f.singular || f.min_pivot <= kSingularPivotTol * scale)
        throw SingularMatrixError(f.min_pivot);
    return lu_solve(f, b);
}

double min_eig_sym(const Mat& m) {
    require(m.rows() == m.cols(), "min_eig_sym requires a square matrix");
    const int n = m.rows();
    const double scale = m.norm();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::fabs(m(i, j) - m(j, i)) > kSymmetryTol * std::max(scale, 1e-300))
                throw SymmetryError("min_eig_sym: input not symmetric within tolerance");

    Mat a = m;
    // Cyclic Jacobi; quadratic convergence, plenty for dim <= 32.
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(off) <= kJacobiOffTol * std::max(scale, 1e-300)) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0)
                                     ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                     : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    double lmin = a(0, 0);
    for (int i = 1; i < n; ++i) lmin = std::min(lmin, a(i, i));
    return lmin;
}

}  // namespace dremrac
