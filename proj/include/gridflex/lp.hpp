#pragma once

#include "gridflex/linalg.hpp"

namespace gridflex {

enum class LpStatus { Optimal, Infeasible, Unbounded };

/// Linear program in equality + box form:
///   maximize objective . z   s.t.  eq_a z = eq_b,  lo <= z <= hi.
/// Bounds may be +-inf.
struct LpProblem {
    Vector objective;
    Matrix eq_a;
    Vector eq_b;
    Vector lo;
    Vector hi;
};

struct LpResult {
    LpStatus status = LpStatus::Optimal;
    Vector z;
    double value = 0.0;
    Vector dual;           // multiplier per equality row (valid when optimal)
    double duality_gap = 0.0;
    int iterations = 0;
};

/// Two-phase bounded-variable simplex. Deterministic: Dantzig pricing with
/// lowest-index tie breaks, Bland's rule engaged after degenerate stalls.
LpResult solve_lp(const LpProblem& p);

const char* to_string(LpStatus s);

}  // namespace gridflex
