#include <doctest.h>

#include <random>

#include "gridflex/lp.hpp"

using namespace gridflex;

namespace {

// max violation across equality rows and boxes
double primal_infeasibility(const LpProblem& p, const Vector& z) {
    double worst = 0.0;
    for (std::size_t r = 0; r < p.eq_a.rows(); ++r) {
        double lhs = 0.0;
        for (std::size_t c = 0; c < p.eq_a.cols(); ++c) lhs += p.eq_a(r, c) * z[c];
        worst = std::max(worst, std::abs(lhs - p.eq_b[r]));
    }
    for (std::size_t c = 0; c < z.size(); ++c) {
        worst = std::max(worst, p.lo[c] - z[c]);
        worst = std::max(worst, z[c] - p.hi[c]);
    }
    return worst;
}

}  // namespace

TEST_CASE("simplex solves a hand-checked box LP") {
    // maximize 2x + 3y with x + y + s = 4, x in [0,3], y in [0,2]: optimum (2,2)
    LpProblem p;
    p.objective = {2, 3, 0};
    p.eq_a = Matrix(1, 3);
    p.eq_a(0, 0) = 1; p.eq_a(0, 1) = 1; p.eq_a(0, 2) = 1;
    p.eq_b = {4};
    p.lo = {0, 0, 0};
    p.hi = {3, 2, kInf};
    const LpResult res = solve_lp(p);
    REQUIRE(res.status == LpStatus::Optimal);
    CHECK(res.value == doctest::Approx(10.0).epsilon(1e-10));
    CHECK(res.z[0] == doctest::Approx(2.0));
    CHECK(res.z[1] == doctest::Approx(2.0));
    CHECK(res.duality_gap == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("negative bounds and maximization at the upper box") {
    // maximize x with x + y = 0, x in [-2, 1.5], y in [-3, 3]
    LpProblem p;
    p.objective = {1, 0};
    p.eq_a = Matrix(1, 2);
    p.eq_a(0, 0) = 1; p.eq_a(0, 1) = 1;
    p.eq_b = {0};
    p.lo = {-2, -3};
    p.hi = {1.5, 3};
    const LpResult res = solve_lp(p);
    REQUIRE(res.status == LpStatus::Optimal);
    CHECK(res.z[0] == doctest::Approx(1.5));
    CHECK(res.z[1] == doctest::Approx(-1.5));
}

TEST_CASE("infeasible boxes are reported") {
    LpProblem p;
    p.objective = {1, 1};
    p.eq_a = Matrix(1, 2);
    p.eq_a(0, 0) = 1; p.eq_a(0, 1) = 1;
    p.eq_b = {5};
    p.lo = {0, 0};
    p.hi = {1, 1};
    CHECK(solve_lp(p).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded rays are reported") {
    LpProblem p;
    p.objective = {1, 0};
    p.eq_a = Matrix(1, 2);
    p.eq_a(0, 0) = 1; p.eq_a(0, 1) = -1;
    p.eq_b = {0};
    p.lo = {0, 0};
    p.hi = {kInf, kInf};
    CHECK(solve_lp(p).status == LpStatus::Unbounded);
}

TEST_CASE("random bounded LPs close the duality gap") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 4 + rng() % 8;
        const std::size_t m = 1 + rng() % (n / 2);
        LpProblem p;
        p.eq_a = Matrix(m, n);
        p.lo.resize(n);
        p.hi.resize(n);
        p.objective.resize(n);
        Vector z0(n);
        for (std::size_t c = 0; c < n; ++c) {
            p.lo[c] = -1.0 - u(rng);
            p.hi[c] = 1.0 + u(rng);
            z0[c] = 0.5 * (p.lo[c] + p.hi[c]);
            p.objective[c] = u(rng);
        }
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c) p.eq_a(r, c) = u(rng);
        p.eq_b = mat_vec(p.eq_a, z0);  // feasible by construction, bounded by boxes

        const LpResult res = solve_lp(p);
        REQUIRE(res.status == LpStatus::Optimal);
        CHECK(primal_infeasibility(p, res.z) < 1e-8);
        CHECK(std::abs(res.duality_gap) < 1e-7);
        CHECK(res.value + 1e-9 >= dot(p.objective, z0));  // beats the seed point
    }
}

TEST_CASE("degenerate vertex does not cycle") {
    // multiple rows pin the same vertex
    LpProblem p;
    p.objective = {1, 1, 0, 0};
    p.eq_a = Matrix(2, 4);
    p.eq_a(0, 0) = 1; p.eq_a(0, 2) = 1;
    p.eq_a(1, 0) = 1; p.eq_a(1, 1) = 1; p.eq_a(1, 3) = 1;
    p.eq_b = {1, 1};
    p.lo = {0, 0, 0, 0};
    p.hi = {kInf, kInf, kInf, kInf};
    const LpResult res = solve_lp(p);
    REQUIRE(res.status == LpStatus::Optimal);
    CHECK(res.value == doctest::Approx(1.0));
}
