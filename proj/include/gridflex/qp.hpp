#pragma once

#include "gridflex/linalg.hpp"

namespace gridflex {

enum class QpStatus { Optimal, Infeasible };

// minimize 1/2 z'Hz + g'z  subject to  eq_a z = eq_b,  in_a z <= in_b,  lo <= z <= hi.
// H must be symmetric positive semidefinite; a small diagonal shift keeps the
// working-set systems nonsingular.
struct QpProblem {
    Matrix h;
    Vector g;
    Matrix eq_a;
    Vector eq_b;
    Matrix in_a;
    Vector in_b;
    Vector lo;
    Vector hi;
};

struct QpResult {
    QpStatus status = QpStatus::Optimal;
    Vector z;
    double value = 0.0;
    double kkt_residual = 0.0;  // max violation across stationarity and feasibility
    int iterations = 0;
};

// warm_start, when nonempty, must satisfy the equality rows and bounds; it seeds
// the active set. Otherwise a phase-1 LP finds a feasible point.
QpResult solve_qp(const QpProblem& p, const Vector& warm_start = {});

const char* to_string(QpStatus s);

}  // namespace gridflex
