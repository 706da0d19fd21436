#include "gridflex/acpf.hpp"

#include <cmath>

#include "gridflex/newton.hpp"

namespace gridflex {

void computed_injections(const Network& net, const AdmittanceMatrix& y, const Vector& v,
                         const Vector& theta, Vector& p_calc, Vector& q_calc) {
    const std::size_t n = net.size();
    p_calc.assign(n, 0.0);
    q_calc.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double pi = 0.0, qi = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double g = y.g(i, j), b = y.b(i, j);
            if (g == 0.0 && b == 0.0) continue;
            const double tij = theta[i] - theta[j];
            const double c = std::cos(tij), s = std::sin(tij);
            pi += v[j] * (g * c + b * s);
            qi += v[j] * (g * s - b * c);
        }
        p_calc[i] = v[i] * pi;
        q_calc[i] = v[i] * qi;
    }
}

InjectionDerivatives injection_derivatives(const AdmittanceMatrix& y, const Vector& v,
                                           const Vector& theta, const Vector& p_calc,
                                           const Vector& q_calc, std::size_t i, std::size_t j) {
    InjectionDerivatives d;
    if (i == j) {
        d.dp_dt = -q_calc[i] - y.b(i, i) * v[i] * v[i];
        d.dq_dt = p_calc[i] - y.g(i, i) * v[i] * v[i];
        d.dp_dv = p_calc[i] / v[i] + y.g(i, i) * v[i];
        d.dq_dv = q_calc[i] / v[i] - y.b(i, i) * v[i];
    } else {
        const double g = y.g(i, j), b = y.b(i, j);
        const double tij = theta[i] - theta[j];
        const double c = std::cos(tij), s = std::sin(tij);
        d.dp_dt = v[i] * v[j] * (g * s - b * c);
        d.dq_dt = -v[i] * v[j] * (g * c + b * s);
        d.dp_dv = v[i] * (g * c + b * s);
        d.dq_dv = v[i] * (g * s - b * c);
    }
    return d;
}

namespace {

std::vector<std::size_t> nonslack_buses(const Network& net) {
    std::vector<std::size_t> out;
    const std::size_t s = net.slack();
    for (std::size_t i = 0; i < net.size(); ++i)
        if (i != s) out.push_back(i);
    return out;
}

}  // namespace

Vector ac_residual(const PowerFlowState& state, const Network& net) {
    return ac_residual(state, net, build_ybus(net));
}

Vector ac_residual(const PowerFlowState& state, const Network& net, const AdmittanceMatrix& y) {
    Vector p_calc, q_calc;
    computed_injections(net, y, state.v, state.theta, p_calc, q_calc);
    const auto ns = nonslack_buses(net);
    Vector r(2 * ns.size());
    for (std::size_t k = 0; k < ns.size(); ++k) {
        r[k] = state.p[ns[k]] - p_calc[ns[k]];
        r[ns.size() + k] = state.q[ns[k]] - q_calc[ns[k]];
    }
    return r;
}

Matrix ac_jacobian(const PowerFlowState& state, const Network& net, const AdmittanceMatrix& y) {
    const auto ns = nonslack_buses(net);
    const std::size_t nn = ns.size();
    const Vector& v = state.v;
    const Vector& theta = state.theta;
    Vector p_calc, q_calc;
    computed_injections(net, y, v, theta, p_calc, q_calc);

    // residual = target - calc, so every entry is the negated calc derivative
    Matrix jac(2 * nn, 2 * nn);
    for (std::size_t a = 0; a < nn; ++a) {
        for (std::size_t b = 0; b < nn; ++b) {
            const InjectionDerivatives d =
                injection_derivatives(y, v, theta, p_calc, q_calc, ns[a], ns[b]);
            jac(a, b) = -d.dp_dt;
            jac(a, nn + b) = -d.dp_dv;
            jac(nn + a, b) = -d.dq_dt;
            jac(nn + a, nn + b) = -d.dq_dv;
        }
    }
    return jac;
}

void branch_flows(PowerFlowState& state, const Network& net) {
    const std::size_t m = net.branches.size();
    state.branch_p.assign(m, 0.0);
    state.branch_q.assign(m, 0.0);
    state.ell.assign(m, 0.0);
    for (std::size_t l = 0; l < m; ++l) {
        const Branch& br = net.branches[l];
        const double g = series_g(br), b = series_b(br);
        const double vi = state.v[br.from], vj = state.v[br.to];
        const double tij = state.theta[br.from] - state.theta[br.to];
        const double c = std::cos(tij), s = std::sin(tij);
        state.branch_p[l] = g * vi * vi - vi * vj * (g * c + b * s);
        state.branch_q[l] = -b * vi * vi - vi * vj * (g * s - b * c);
        const double dv2 = vi * vi + vj * vj - 2.0 * vi * vj * c;
        state.ell[l] = (g * g + b * b) * dv2;
    }
}

PowerFlowState solve_ac(const Network& net, const BusInjections& inj, const AcSolveOptions& opt) {
    const std::size_t n = net.size();
    if (inj.p.size() != n || inj.q.size() != n) throw Error("solve_ac: injection size mismatch");
    const AdmittanceMatrix y = build_ybus(net);
    const auto ns = nonslack_buses(net);
    const std::size_t nn = ns.size();

    PowerFlowState state;
    state.v.assign(n, 1.0);
    state.theta.assign(n, 0.0);
    state.p = inj.p;
    state.q = inj.q;

    auto apply = [&](const Vector& x) {
        for (std::size_t k = 0; k < nn; ++k) {
            state.theta[ns[k]] = x[k];
            state.v[ns[k]] = x[nn + k];
        }
    };
    auto residual = [&](const Vector& x) {
        apply(x);
        return ac_residual(state, net, y);
    };
    auto jacobian = [&](const Vector& x) {
        apply(x);
        return ac_jacobian(state, net, y);
    };

    Vector x(2 * nn);
    for (std::size_t k = 0; k < nn; ++k) {
        x[k] = 0.0;
        x[nn + k] = 1.0;
    }
    NewtonOptions nopt;
    nopt.max_iterations = opt.max_iterations;
    nopt.tolerance = opt.tolerance;
    const NewtonOutcome out = newton_solve(x, residual, jacobian, nopt);
    apply(x);
    state.iterations = out.iterations;
    state.residual_norm = out.residual_norm;
    if (!out.converged) {
        char msg[128];
        std::snprintf(msg, sizeof(msg), "solve_ac: no convergence after %d iterations, mismatch %.3e",
                      out.iterations, out.residual_norm);
        throw Error(msg);
    }

    // slack absorbs the imbalance; report the computed injection everywhere
    Vector p_calc, q_calc;
    computed_injections(net, y, state.v, state.theta, p_calc, q_calc);
    const std::size_t s = net.slack();
    state.p[s] = p_calc[s];
    state.q[s] = q_calc[s];
    branch_flows(state, net);
    return state;
}

DistFlowState solve_distflow(const Network& net, const BusInjections& inj,
                             const AcSolveOptions& opt) {
    if (!check_radial(net)) throw Error("solve_distflow: network is not radial");
    const std::size_t n = net.size();
    if (inj.p.size() != n || inj.q.size() != n)
        throw Error("solve_distflow: injection size mismatch");
    const std::size_t m = net.branches.size();
    const std::size_t s = net.slack();
    const auto ns = nonslack_buses(net);
    const std::size_t nn = ns.size();

    // unknowns: [u at non-slack | P | Q | ell]; slack u pinned at 1
    const std::size_t off_p = nn, off_q = nn + m, off_l = nn + 2 * m;
    std::vector<std::size_t> upos(n, n);  // bus -> position in u block
    for (std::size_t k = 0; k < nn; ++k) upos[ns[k]] = k;

    auto u_of = [&](const Vector& z, std::size_t bus) {
        return bus == s ? 1.0 : z[upos[bus]];
    };

    auto residual = [&](const Vector& z) {
        Vector r(2 * nn + 2 * m, 0.0);
        // nodal balance: target - computed
        for (std::size_t k = 0; k < nn; ++k) {
            r[k] = inj.p[ns[k]];
            r[nn + k] = inj.q[ns[k]];
        }
        for (std::size_t l = 0; l < m; ++l) {
            const Branch& br = net.branches[l];
            const double pl = z[off_p + l], ql = z[off_q + l], el = z[off_l + l];
            if (br.from != s) {
                r[upos[br.from]] -= pl;
                r[nn + upos[br.from]] -= ql;
            }
            if (br.to != s) {
                r[upos[br.to]] += pl - br.r * el;
                r[nn + upos[br.to]] += ql - br.x * el;
            }
        }
        for (std::size_t l = 0; l < m; ++l) {
            const Branch& br = net.branches[l];
            const double pl = z[off_p + l], ql = z[off_q + l], el = z[off_l + l];
            const double ui = u_of(z, br.from), uj = u_of(z, br.to);
            r[2 * nn + l] = uj - ui + 2.0 * (br.r * pl + br.x * ql) -
                            (br.r * br.r + br.x * br.x) * el;
            r[2 * nn + m + l] = el * ui - pl * pl - ql * ql;
        }
        return r;
    };

    auto jacobian = [&](const Vector& z) {
        Matrix jac(2 * nn + 2 * m, 2 * nn + 2 * m);
        for (std::size_t l = 0; l < m; ++l) {
            const Branch& br = net.branches[l];
            if (br.from != s) {
                jac(upos[br.from], off_p + l) = -1.0;
                jac(nn + upos[br.from], off_q + l) = -1.0;
            }
            if (br.to != s) {
                jac(upos[br.to], off_p + l) = 1.0;
                jac(upos[br.to], off_l + l) = -br.r;
                jac(nn + upos[br.to], off_q + l) = 1.0;
                jac(nn + upos[br.to], off_l + l) = -br.x;
            }
            const double pl = z[off_p + l], ql = z[off_q + l], el = z[off_l + l];
            const std::size_t rv = 2 * nn + l, rc = 2 * nn + m + l;
            if (br.to != s) jac(rv, upos[br.to]) = 1.0;
            if (br.from != s) jac(rv, upos[br.from]) = -1.0;
            jac(rv, off_p + l) = 2.0 * br.r;
            jac(rv, off_q + l) = 2.0 * br.x;
            jac(rv, off_l + l) = -(br.r * br.r + br.x * br.x);
            jac(rc, off_l + l) = u_of(z, br.from);
            if (br.from != s) jac(rc, upos[br.from]) = el;
            jac(rc, off_p + l) = -2.0 * pl;
            jac(rc, off_q + l) = -2.0 * ql;
        }
        return jac;
    };

    Vector z(2 * nn + 2 * m, 0.0);
    for (std::size_t k = 0; k < nn; ++k) z[k] = 1.0;  // flat start u = 1, flows 0

    NewtonOptions nopt;
    nopt.max_iterations = opt.max_iterations;
    nopt.tolerance = opt.tolerance;
    const NewtonOutcome out = newton_solve(z, residual, jacobian, nopt);
    if (!out.converged) {
        char msg[128];
        std::snprintf(msg, sizeof(msg),
                      "solve_distflow: no convergence after %d iterations, mismatch %.3e",
                      out.iterations, out.residual_norm);
        throw Error(msg);
    }

    DistFlowState st;
    st.u.assign(n, 1.0);
    for (std::size_t k = 0; k < nn; ++k) st.u[ns[k]] = z[k];
    st.branch_p.assign(z.begin() + static_cast<long>(off_p), z.begin() + static_cast<long>(off_q));
    st.branch_q.assign(z.begin() + static_cast<long>(off_q), z.begin() + static_cast<long>(off_l));
    st.ell.assign(z.begin() + static_cast<long>(off_l), z.end());
    st.iterations = out.iterations;
    st.residual_norm = out.residual_norm;
    return st;
}

double total_losses(const PowerFlowState& state, const Network& net) {
    double sum = 0.0;
    for (std::size_t l = 0; l < net.branches.size(); ++l)
        sum += net.branches[l].r * state.ell[l];
    return sum;
}

double total_losses(const DistFlowState& state, const Network& net) {
    double sum = 0.0;
    for (std::size_t l = 0; l < net.branches.size(); ++l)
        sum += net.branches[l].r * state.ell[l];
    return sum;
}

}  // namespace gridflex
