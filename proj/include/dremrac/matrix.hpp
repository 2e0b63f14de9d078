#pragma once

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace dremrac {

/// Raised when operand shapes do not agree.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised by solve() when the coefficient matrix is singular within
/// factorization tolerance. Carries the magnitude of the failing pivot.
struct SingularMatrixError : std::runtime_error {
    double pivot_magnitude;
    explicit SingularMatrixError(double pivot)
        : std::runtime_error("singular matrix (pivot magnitude " +
                             std::to_string(pivot) + ")"),
          pivot_magnitude(pivot) {}
};

/// Raised by min_eig_sym() when the input is not symmetric within tolerance.
struct SymmetryError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Dense real matrix, row-major. Column vectors are n-by-1 matrices.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), data_(checked_size(rows, cols), 0.0) {}

    static Mat identity(int n);
    static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Mat col_vec(std::initializer_list<double> entries);
    static Mat col_vec(const std::vector<double>& entries);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int size() const { return rows_ * cols_; }

    double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    /// Linear (row-major) element access; for column vectors this is the
    /// i-th component.
    double& operator[](int i) { return data_[static_cast<size_t>(i)]; }
    double operator[](int i) const { return data_[static_cast<size_t>(i)]; }

    Mat transposed() const;
    Mat block(int r0, int c0, int nrows, int ncols) const;

    double norm() const;      ///< Frobenius norm
    double max_abs() const;
    bool all_finite() const;

    Mat& operator+=(const Mat& o);
    Mat& operator-=(const Mat& o);
    Mat& operator*=(double s);

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    static size_t checked_size(int rows, int cols) {
        if (rows < 0 || cols < 0) throw DimensionError("negative matrix dimension");
        return static_cast<size_t>(rows) * static_cast<size_t>(cols);
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(double s, Mat a);
Mat operator*(Mat a, double s);
Mat operator*(const Mat& a, const Mat& b);

/// Stacks b below a (column counts must agree).
Mat vstack(const Mat& a, const Mat& b);
/// Places b to the right of a (row counts must agree).
Mat hstack(const Mat& a, const Mat& b);

/// det(m). Exact formulas for dimensions 1 and 2, pivoted LU above that.
/// A singular matrix yields 0, not an error.
double determinant(const Mat& m);

/// adj(m), satisfying adj(m)*m = det(m)*I including for singular m.
/// Nonsingular inputs go through LU (det times inverse); inputs with an
/// exactly vanishing pivot fall back to cofactor minors.
Mat adjugate(const Mat& m);

/// Solves a*x = b by pivoted LU. Throws SingularMatrixError when a pivot
/// falls below tolerance.
Mat solve(const Mat& a, const Mat& b);

/// Minimum eigenvalue of a symmetric matrix via cyclic Jacobi sweeps.
double min_eig_sym(const Mat& m);

}  // namespace dremrac
