#include <doctest.h>

#include <random>

#include "gridflex/linalg.hpp"

using namespace gridflex;

TEST_CASE("lu solves a hand-checked 3x3 system") {
    Matrix a(3, 3);
    a(0, 0) = 2;  a(0, 1) = 1;  a(0, 2) = -1;
    a(1, 0) = -3; a(1, 1) = -1; a(1, 2) = 2;
    a(2, 0) = -2; a(2, 1) = 1;  a(2, 2) = 2;
    const Vector b = {8, -11, -3};
    const Vector x = lu_solve(a, b);  // known solution (2, 3, -1)
    CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(x[2] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("lu recovers random solutions") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng() % 12;
        Matrix a(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) a(i, j) = u(rng);
            a(i, i) += 3.0;  // keep it comfortably nonsingular
        }
        Vector x(n);
        for (double& v : x) v = u(rng);
        const Vector got = lu_solve(a, mat_vec(a, x));
        for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(x[i]).epsilon(1e-9));
    }
}

TEST_CASE("lu pivots across a zero leading entry") {
    Matrix a(2, 2);
    a(0, 0) = 0; a(0, 1) = 1;
    a(1, 0) = 1; a(1, 1) = 0;
    const Vector x = lu_solve(a, {3.0, 5.0});
    CHECK(x[0] == doctest::Approx(5.0));
    CHECK(x[1] == doctest::Approx(3.0));
}

TEST_CASE("singular matrix raises") {
    Matrix a(2, 2);
    a(0, 0) = 1; a(0, 1) = 2;
    a(1, 0) = 2; a(1, 1) = 4;
    CHECK_THROWS_AS(lu_solve(a, {1.0, 1.0}), SingularMatrixError);
}

TEST_CASE("vector helpers") {
    CHECK(dot({1, 2, 3}, {4, 5, 6}) == doctest::Approx(32.0));
    CHECK(norm_inf({1, -7, 3}) == doctest::Approx(7.0));
    Matrix a(2, 3);
    a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
    a(1, 0) = 4; a(1, 1) = 5; a(1, 2) = 6;
    const Vector av = mat_vec(a, {1, 1, 1});
    CHECK(av[0] == doctest::Approx(6.0));
    CHECK(av[1] == doctest::Approx(15.0));
    const Vector atv = mat_transpose_vec(a, {1, 1});
    CHECK(atv[0] == doctest::Approx(5.0));
    CHECK(atv[2] == doctest::Approx(9.0));
}

TEST_CASE("append_row grows a matrix") {
    Matrix m;
    m.append_row({1.0, 2.0});
    m.append_row({3.0, 4.0});
    CHECK(m.rows() == 2);
    CHECK(m(1, 1) == doctest::Approx(4.0));
    CHECK_THROWS_AS(m.append_row({1.0}), Error);
}
