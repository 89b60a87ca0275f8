#pragma once

// Small dense matrices for low-dimensional state spaces (d is 1..3 in all
// built-in experiments). Operator norms use closed-form singular values for
// d <= 3 and cyclic Jacobi otherwise, so no linear-algebra dependency is
// needed.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace glelab {

using Vec = std::vector<double>;

class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows * cols), fill) {
        if (rows <= 0 || cols <= 0) throw std::invalid_argument("Mat: nonpositive size");
    }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat diag(const Vec& d) {
        Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
        return m;
    }
    static Mat scalar(double v) {
        Mat m(1, 1);
        m(0, 0) = v;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return a_[static_cast<size_t>(i * cols_ + j)]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i * cols_ + j)]; }

    Mat transpose() const {
        Mat t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Mat& operator+=(const Mat& o) {
        check_same(o);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        check_same(o);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Mat& operator*=(double s) {
        for (double& v : a_) v *= s;
        return *this;
    }

    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(Mat a, double s) { return a *= s; }
    friend Mat operator*(double s, Mat a) { return a *= s; }

    friend Mat operator*(const Mat& a, const Mat& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("Mat: shape mismatch in product");
        Mat c(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    Vec apply(const Vec& x) const {
        if (static_cast<int>(x.size()) != cols_) throw std::invalid_argument("Mat: vector size mismatch");
        Vec y(static_cast<size_t>(rows_), 0.0);
        for (int i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * x[static_cast<size_t>(j)];
            y[static_cast<size_t>(i)] = s;
        }
        return y;
    }

    double frobenius() const {
        double s = 0.0;
        for (double v : a_) s += v * v;
        return std::sqrt(s);
    }

private:
    void check_same(const Mat& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Mat: shape mismatch");
    }

    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(const Vec& a) { return dot(a, a); }

/// Largest singular value. Closed forms for 1x1/2x2/3x3, cyclic Jacobi on
/// A^T A for larger matrices.
double operator_norm(const Mat& a);

/// Eigenvalues of a symmetric matrix, ascending. Jacobi sweeps.
Vec symmetric_eigenvalues(const Mat& a);

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
Mat cholesky(const Mat& a);

}  // namespace glelab
