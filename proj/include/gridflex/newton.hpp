#pragma once

#include <functional>

#include "gridflex/linalg.hpp"

namespace gridflex {

struct NewtonOptions {
    int max_iterations = 50;
    double tolerance = 1e-8;
    int max_halvings = 30;
};

struct NewtonOutcome {
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;
};

// Damped Newton on r(x) = 0: full step first, halved while the residual norm
// grows. x is updated in place and left at the best iterate found.
inline NewtonOutcome newton_solve(Vector& x,
                                  const std::function<Vector(const Vector&)>& residual,
                                  const std::function<Matrix(const Vector&)>& jacobian,
                                  const NewtonOptions& opt = {}) {
    NewtonOutcome out;
    Vector r = residual(x);
    double rnorm = norm_inf(r);
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (rnorm <= opt.tolerance) {
            out.converged = true;
            break;
        }
        Matrix j = jacobian(x);
        Vector neg_r(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) neg_r[i] = -r[i];
        Vector dx = lu_solve(lu_factor(j), neg_r);

        double scale = 1.0;
        Vector x_try(x.size());
        for (int h = 0; h <= opt.max_halvings; ++h) {
            for (std::size_t i = 0; i < x.size(); ++i) x_try[i] = x[i] + scale * dx[i];
            Vector r_try = residual(x_try);
            const double rn = norm_inf(r_try);
            if (rn < rnorm || h == opt.max_halvings) {
                x = x_try;
                r = std::move(r_try);
                rnorm = rn;
                break;
            }
            scale *= 0.5;
        }
        out.iterations = it + 1;
    }
    out.residual_norm = rnorm;
    if (rnorm <= opt.tolerance) out.converged = true;
    return out;
}

}  // namespace gridflex
