#include <doctest.h>

#include <cmath>

#include "glelab/experiments.hpp"
#include "glelab/mat.hpp"
#include "glelab/rng.hpp"

using namespace glelab;

TEST_CASE("operator norm closed forms") {
    CHECK(operator_norm(Mat::scalar(-3.5)) == doctest::Approx(3.5));

    Mat a2(2, 2);
    a2(0, 1) = 2.0;  // nilpotent shear, singular values {2, 0}
    CHECK(operator_norm(a2) == doctest::Approx(2.0));

    Mat a3(3, 3);
    a3(0, 1) = 5.0;
    a3(2, 2) = 1.0;
    CHECK(operator_norm(a3) == doctest::Approx(5.0));

    // rotation invariance: ||Q D Q^T|| = max |d|
    const Mat q = random_orthogonal(3, 99);
    const Mat d = Mat::diag({0.25, -4.0, 1.5});
    CHECK(operator_norm(q * d * q.transpose()) == doctest::Approx(4.0).epsilon(1e-12));

    // Jacobi fallback for 4x4
    Mat a4(4, 4);
    a4(0, 0) = 1.0;
    a4(1, 1) = -7.0;
    a4(2, 3) = 2.0;
    a4(3, 2) = 2.0;
    CHECK(operator_norm(a4) == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("symmetric eigenvalues and cholesky") {
    Mat s(2, 2);
    s(0, 0) = 2.0;
    s(1, 1) = 2.0;
    s(0, 1) = s(1, 0) = 1.0;
    const Vec ev = symmetric_eigenvalues(s);
    CHECK(ev[0] == doctest::Approx(1.0));
    CHECK(ev[1] == doctest::Approx(3.0));

    const Mat l = cholesky(s);
    const Mat llt = l * l.transpose();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(llt(i, j) == doctest::Approx(s(i, j)).epsilon(1e-14));

    Mat nd(2, 2);
    nd(0, 0) = 1.0;
    nd(1, 1) = -1.0;
    CHECK_THROWS_AS(cholesky(nd), std::domain_error);
}

TEST_CASE("counter rng is a pure function of its coordinates") {
    const double a = normal_draw(42, 3, RngStream::Brownian, 17, 2);
    const double b = normal_draw(42, 3, RngStream::Brownian, 17, 2);
    CHECK(a == b);
    CHECK(normal_draw(42, 3, RngStream::Brownian, 18, 2) != a);
    CHECK(normal_draw(42, 4, RngStream::Brownian, 17, 2) != a);
    CHECK(normal_draw(43, 3, RngStream::Brownian, 17, 2) != a);
    CHECK(normal_draw(42, 3, RngStream::InitVelocity, 17, 2) != a);
}

TEST_CASE("gaussian draws have the right moments") {
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0, sum3 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = normal_draw(7, 0, RngStream::Generic, static_cast<uint32_t>(i), 0);
        sum += z;
        sum2 += z * z;
        sum3 += z * z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(sum3 / n) < 0.03);
}

TEST_CASE("uniform draws stay in [0,1)") {
    double lo = 1.0, hi = 0.0, mean = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = uniform_draw(11, 1, RngStream::Generic, static_cast<uint32_t>(i), 0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        mean += u;
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(mean / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("seeded orthogonal matrices are orthogonal and reproducible") {
    const Mat q1 = random_orthogonal(3, 5);
    const Mat q2 = random_orthogonal(3, 5);
    const Mat qtq = q1.transpose() * q1;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            CHECK(q1(i, j) == q2(i, j));
            CHECK(qtq(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
        }
}
