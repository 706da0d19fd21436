#include <doctest.h>

#include <complex>
#include <random>

#include "gridflex/acpf.hpp"
#include "test_util.hpp"

using namespace gridflex;

TEST_CASE("ybus of a single branch") {
    const Network net = testutil::two_bus();
    const AdmittanceMatrix y = build_ybus(net);
    // 1/(0.01 + 0.03j) = 10 - 30j
    CHECK(y.g(0, 0) == doctest::Approx(10.0));
    CHECK(y.b(0, 0) == doctest::Approx(-30.0));
    CHECK(y.g(0, 1) == doctest::Approx(-10.0));
    CHECK(y.b(0, 1) == doctest::Approx(30.0));
    CHECK(y.g(1, 1) == doctest::Approx(10.0));
}

TEST_CASE("newton agrees with an independent gauss-seidel solve") {
    const Network net = testutil::two_bus(0.3, 0.1);
    BusInjections inj = base_injections(net, 1.0, 0.0);
    const PowerFlowState st = solve_ac(net, inj);

    // fixed point V = V0 + z * conj(S / V), a different method entirely
    const std::complex<double> z(0.01, 0.03);
    const std::complex<double> s(inj.p[1], inj.q[1]);
    std::complex<double> v(1.0, 0.0);
    for (int i = 0; i < 200; ++i) v = 1.0 + z * std::conj(s / v);
    CHECK(st.v[1] == doctest::Approx(std::abs(v)).epsilon(1e-9));
    CHECK(st.theta[1] == doctest::Approx(std::arg(v)).epsilon(1e-9));
}

TEST_CASE("converged states satisfy the balance equations tightly") {
    const Network net = load_network(testutil::data_path("networks/feeder33.json"));
    const PowerFlowState st = solve_ac(net, base_injections(net, 1.0, 0.0));
    CHECK(st.residual_norm < 1e-10);
    CHECK(norm_inf(ac_residual(st, net)) < 1e-8);
    CHECK(st.iterations < 10);  // flat start on a healthy feeder
    // published benchmark for this feeder: about 202.7 kW of losses on 10 MVA
    CHECK(total_losses(st, net) == doctest::Approx(0.020268).epsilon(1e-3));
    double v_min = 2.0;
    for (double v : st.v) v_min = std::min(v_min, v);
    CHECK(v_min == doctest::Approx(0.9131).epsilon(1e-3));
}

TEST_CASE("losses close the power balance") {
    const Network net = testutil::three_bus();
    const PowerFlowState st = solve_ac(net, base_injections(net, 0.9, 0.5));
    double sum_p = 0.0;
    for (double p : st.p) sum_p += p;
    CHECK(sum_p == doctest::Approx(total_losses(st, net)).epsilon(1e-10));
    // per-branch from-side flow identity against ell
    for (std::size_t l = 0; l < net.branches.size(); ++l)
        CHECK(st.ell[l] >= 0.0);
}

TEST_CASE("analytic jacobian matches central differences") {
    const Network net = testutil::three_bus();
    const AdmittanceMatrix y = build_ybus(net);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> uv(0.95, 1.05), ut(-0.05, 0.05);
    for (int trial = 0; trial < 5; ++trial) {
        PowerFlowState st;
        st.v = {1.0, uv(rng), uv(rng)};
        st.theta = {0.0, ut(rng), ut(rng)};
        st.p = {0.0, -0.2, -0.1};
        st.q = {0.0, -0.05, -0.02};
        const Matrix jac = ac_jacobian(st, net, y);
        const double h = 1e-6;
        for (std::size_t col = 0; col < 4; ++col) {
            PowerFlowState hi = st, lo = st;
            if (col < 2) {
                hi.theta[col + 1] += h;
                lo.theta[col + 1] -= h;
            } else {
                hi.v[col - 1] += h;
                lo.v[col - 1] -= h;
            }
            const Vector rp = ac_residual(hi, net, y);
            const Vector rm = ac_residual(lo, net, y);
            for (std::size_t row = 0; row < rp.size(); ++row) {
                const double fd = (rp[row] - rm[row]) / (2.0 * h);
                CHECK(jac(row, col) == doctest::Approx(fd).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("distflow matches ac on radial feeders") {
    for (const Network& net :
         {testutil::two_bus(), testutil::three_bus(),
          load_network(testutil::data_path("networks/feeder33.json"))}) {
        const BusInjections inj = base_injections(net, 1.0, 0.5);
        const PowerFlowState ac = solve_ac(net, inj);
        const DistFlowState df = solve_distflow(net, inj);
        for (std::size_t i = 0; i < net.size(); ++i)
            CHECK(std::abs(df.u[i] - ac.v[i] * ac.v[i]) < 1e-6);
        CHECK(total_losses(df, net) == doctest::Approx(total_losses(ac, net)).epsilon(1e-6));
    }
}

TEST_CASE("hopeless loading reports non-convergence") {
    Network net = testutil::two_bus(60.0, 20.0);  // far beyond the feeder's capability
    CHECK_THROWS_AS(solve_ac(net, base_injections(net, 1.0, 0.0)), Error);
}

TEST_CASE("storage injections shift the slack import") {
    const Network net = testutil::three_bus();
    BusInjections inj = base_injections(net, 1.0, 0.0);
    const double before = solve_ac(net, inj).p[0];
    inj.p[2] -= 0.05;  // charge the battery at bus 2
    const double after = solve_ac(net, inj).p[0];
    CHECK(after > before + 0.049);  // import grows by the charge plus extra losses
}
