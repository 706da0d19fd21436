#include <doctest.h>

#include <random>

#include "gridflex/qp.hpp"

using namespace gridflex;

namespace {

QpProblem unconstrained(std::size_t n) {
    QpProblem p;
    p.h = Matrix(n, n);
    p.g.assign(n, 0.0);
    p.lo.assign(n, -kInf);
    p.hi.assign(n, kInf);
    return p;
}

}  // namespace

TEST_CASE("unconstrained quadratic lands on the stationary point") {
    QpProblem p = unconstrained(2);
    p.h(0, 0) = 2; p.h(1, 1) = 2;
    p.g = {-2, -4};  // minimum at (1, 2), value -5
    const QpResult res = solve_qp(p);
    REQUIRE(res.status == QpStatus::Optimal);
    CHECK(res.z[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(res.z[1] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(res.value == doctest::Approx(-5.0).epsilon(1e-8));
    CHECK(res.kkt_residual < 1e-8);
}

TEST_CASE("equality projection") {
    // min x^2 + y^2 subject to x + y = 2: optimum (1, 1)
    QpProblem p = unconstrained(2);
    p.h(0, 0) = 2; p.h(1, 1) = 2;
    p.eq_a = Matrix(1, 2);
    p.eq_a(0, 0) = 1; p.eq_a(0, 1) = 1;
    p.eq_b = {2};
    const QpResult res = solve_qp(p);
    REQUIRE(res.status == QpStatus::Optimal);
    CHECK(res.z[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.z[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("active box bound") {
    // min (x-2)^2 with x <= 1 sticks to the bound
    QpProblem p = unconstrained(1);
    p.h(0, 0) = 2;
    p.g = {-4};
    p.hi = {1.0};
    const QpResult res = solve_qp(p);
    REQUIRE(res.status == QpStatus::Optimal);
    CHECK(res.z[0] == doctest::Approx(1.0));
}

TEST_CASE("inequality activates only when binding") {
    // min x^2 + y^2 subject to x + y >= 1 (as -x - y <= -1): optimum (0.5, 0.5)
    QpProblem p = unconstrained(2);
    p.h(0, 0) = 2; p.h(1, 1) = 2;
    p.in_a = Matrix(1, 2);
    p.in_a(0, 0) = -1; p.in_a(0, 1) = -1;
    p.in_b = {-1};
    const QpResult res = solve_qp(p);
    REQUIRE(res.status == QpStatus::Optimal);
    CHECK(res.z[0] == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(res.z[1] == doctest::Approx(0.5).epsilon(1e-8));

    p.in_b = {1};  // now satisfied strictly at the origin
    const QpResult loose = solve_qp(p);
    REQUIRE(loose.status == QpStatus::Optimal);
    CHECK(std::abs(loose.z[0]) < 1e-9);
    CHECK(std::abs(loose.z[1]) < 1e-9);
}

TEST_CASE("conflicting equality and boxes are infeasible") {
    QpProblem p = unconstrained(2);
    p.h(0, 0) = 2; p.h(1, 1) = 2;
    p.eq_a = Matrix(1, 2);
    p.eq_a(0, 0) = 1; p.eq_a(0, 1) = 1;
    p.eq_b = {5};
    p.lo = {0, 0};
    p.hi = {1, 1};
    CHECK(solve_qp(p).status == QpStatus::Infeasible);
}

TEST_CASE("random convex QPs satisfy their KKT certificate") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 3 + rng() % 6;
        QpProblem p = unconstrained(n);
        // H = M'M + I keeps it positive definite
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) = u(rng);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = i == j ? 1.0 : 0.0;
                for (std::size_t k = 0; k < n; ++k) s += m(k, i) * m(k, j);
                p.h(i, j) = s;
            }
        Vector z0(n);
        for (std::size_t c = 0; c < n; ++c) {
            p.g[c] = u(rng);
            p.lo[c] = -1.5;
            p.hi[c] = 1.5;
            z0[c] = 0.5 * u(rng);
        }
        p.eq_a = Matrix(1, n);
        for (std::size_t c = 0; c < n; ++c) p.eq_a(0, c) = u(rng);
        p.eq_b = {dot(p.eq_a.row(0), z0)};
        p.in_a = Matrix(1, n);
        for (std::size_t c = 0; c < n; ++c) p.in_a(0, c) = u(rng);
        p.in_b = {dot(p.in_a.row(0), z0) + 0.2};

        const QpResult res = solve_qp(p);
        REQUIRE(res.status == QpStatus::Optimal);
        CHECK(res.kkt_residual < 1e-7);
        // optimal value cannot exceed the feasible seed's objective
        double seed = dot(p.g, z0);
        for (std::size_t i = 0; i < n; ++i) seed += 0.5 * z0[i] * dot(p.h.row(i), z0);
        CHECK(res.value <= seed + 1e-9);
    }
}

TEST_CASE("warm start agrees with the cold solve") {
    QpProblem p = unconstrained(2);
    p.h(0, 0) = 4; p.h(1, 1) = 2;
    p.g = {-1, -1};
    p.lo = {0, 0};
    p.hi = {1, 1};
    const QpResult cold = solve_qp(p);
    const QpResult warm = solve_qp(p, {0.5, 0.5});
    REQUIRE(cold.status == QpStatus::Optimal);
    REQUIRE(warm.status == QpStatus::Optimal);
    CHECK(cold.value == doctest::Approx(warm.value).epsilon(1e-10));
}
