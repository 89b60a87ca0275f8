#include "glelab/mat.hpp"

#include <algorithm>
#include <cmath>

namespace glelab {

namespace {

// Largest eigenvalue of a symmetric 2x2 [[p, r], [r, q]].
double sym2_eig_max(double p, double q, double r) {
    const double m = 0.5 * (p + q);
    const double d = 0.5 * (p - q);
    return m + std::sqrt(d * d + r * r);
}

// Largest eigenvalue of a symmetric 3x3 via the trigonometric closed form.
double sym3_eig_max(const Mat& s) {
    const double p1 = s(0, 1) * s(0, 1) + s(0, 2) * s(0, 2) + s(1, 2) * s(1, 2);
    const double tr = s(0, 0) + s(1, 1) + s(2, 2);
    if (p1 <= 1e-300) {
        return std::max({s(0, 0), s(1, 1), s(2, 2)});
    }
    const double q = tr / 3.0;
    const double p2 = (s(0, 0) - q) * (s(0, 0) - q) + (s(1, 1) - q) * (s(1, 1) - q) +
                      (s(2, 2) - q) * (s(2, 2) - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    // B = (S - q I) / p, r = det(B) / 2 clamped into [-1, 1]
    Mat b = s;
    for (int i = 0; i < 3; ++i) b(i, i) -= q;
    b *= 1.0 / p;
    const double detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                        b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                        b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    const double r = std::clamp(detb / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    return q + 2.0 * p * std::cos(phi);
}

// One cyclic Jacobi pass count on a symmetric matrix, in place.
void jacobi_sweeps(Mat& s, int max_sweeps = 50, double tol = 1e-14) {
    const int n = s.rows();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += s(i, j) * s(i, j);
        if (off < tol * tol) return;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(s(p, q)) < 1e-300) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (int k = 0; k < n; ++k) {
                    const double skp = s(k, p), skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (int k = 0; k < n; ++k) {
                    const double spk = s(p, k), sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                }
            }
        }
    }
}

}  // namespace

double operator_norm(const Mat& a) {
    const int n = a.rows(), m = a.cols();
    if (n == 1 && m == 1) return std::abs(a(0, 0));
    // Gram matrix A^T A (m x m); largest singular value = sqrt(lambda_max).
    Mat g = a.transpose() * a;
    if (m == 2) return std::sqrt(std::max(0.0, sym2_eig_max(g(0, 0), g(1, 1), g(0, 1))));
    if (m == 3) return std::sqrt(std::max(0.0, sym3_eig_max(g)));
    jacobi_sweeps(g);
    double lmax = 0.0;
    for (int i = 0; i < m; ++i) lmax = std::max(lmax, g(i, i));
    return std::sqrt(std::max(0.0, lmax));
}

Vec symmetric_eigenvalues(const Mat& a) {
    Mat s = a;
    jacobi_sweeps(s);
    Vec ev(static_cast<size_t>(s.rows()));
    for (int i = 0; i < s.rows(); ++i) ev[static_cast<size_t>(i)] = s(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

Mat cholesky(const Mat& a) {
    const int n = a.rows();
    Mat l(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0) throw std::domain_error("cholesky: matrix not positive definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

}  // namespace glelab
