#pragma once

#include "gridflex/linalg.hpp"
#include "gridflex/network.hpp"
#include "gridflex/profiles.hpp"

namespace gridflex {

struct PowerFlowState {
    Vector v;         // voltage magnitude per bus (p.u.)
    Vector theta;     // angle per bus (rad), slack at 0
    Vector p, q;      // net injections (p.u., generation positive)
    Vector branch_p;  // from-side P_ij
    Vector branch_q;  // from-side Q_ij
    Vector ell;       // squared branch current
    int iterations = 0;
    double residual_norm = 0.0;
};

struct DistFlowState {
    Vector u;         // squared voltage magnitude per bus
    Vector branch_p;  // from-side flows
    Vector branch_q;
    Vector ell;
    int iterations = 0;
    double residual_norm = 0.0;
};

struct AcSolveOptions {
    int max_iterations = 50;
    double tolerance = 1e-10;
};

// Injections computed from the polar balance equations at (v, theta).
void computed_injections(const Network& net, const AdmittanceMatrix& y, const Vector& v,
                         const Vector& theta, Vector& p_calc, Vector& q_calc);

// Partial derivatives of the computed injection at bus i with respect to
// theta_j and v_j; p_calc/q_calc must come from computed_injections.
struct InjectionDerivatives {
    double dp_dt = 0.0, dp_dv = 0.0, dq_dt = 0.0, dq_dv = 0.0;
};
InjectionDerivatives injection_derivatives(const AdmittanceMatrix& y, const Vector& v,
                                           const Vector& theta, const Vector& p_calc,
                                           const Vector& q_calc, std::size_t i, std::size_t j);

// Power mismatch (target minus computed) of the polar balance equations,
// stacked as [p rows; q rows] over non-slack buses. state.p/state.q hold the
// targets at non-slack positions.
Vector ac_residual(const PowerFlowState& state, const Network& net);
Vector ac_residual(const PowerFlowState& state, const Network& net, const AdmittanceMatrix& y);

// Jacobian of ac_residual with respect to [theta_nonslack; v_nonslack].
Matrix ac_jacobian(const PowerFlowState& state, const Network& net, const AdmittanceMatrix& y);

PowerFlowState solve_ac(const Network& net, const BusInjections& inj,
                        const AcSolveOptions& opt = {});

// Fills branch_p, branch_q, ell from v and theta.
void branch_flows(PowerFlowState& state, const Network& net);

DistFlowState solve_distflow(const Network& net, const BusInjections& inj,
                             const AcSolveOptions& opt = {});

double total_losses(const PowerFlowState& state, const Network& net);
double total_losses(const DistFlowState& state, const Network& net);

// Series admittance components of a branch: y = 1/(r + jx).
inline double series_g(const Branch& br) { return br.r / (br.r * br.r + br.x * br.x); }
inline double series_b(const Branch& br) { return -br.x / (br.r * br.r + br.x * br.x); }

}  // namespace gridflex
