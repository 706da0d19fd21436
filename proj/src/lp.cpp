#include "gridflex/lp.hpp"

#include <algorithm>
#include <cmath>

namespace gridflex {

namespace {

constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-10;
constexpr int kRefactorEvery = 64;

enum class VarState { Basic, AtLower, AtUpper, Free };

struct Simplex {
    // structural variables 0..n-1, artificials n..n+m-1
    const LpProblem& p;
    std::size_t n, m;
    Vector lo, hi;            // includes artificials
    std::vector<double> art_sign;
    std::vector<VarState> state;
    std::vector<std::size_t> basis;  // variable index per row
    Matrix binv;              // explicit basis inverse, m x m
    Vector x;                 // current values, all variables
    int iterations = 0;
    int degenerate_streak = 0;
    bool bland = false;

    explicit Simplex(const LpProblem& prob) : p(prob) {
        n = p.objective.size();
        m = p.eq_b.size();
        lo = p.lo;
        hi = p.hi;
        state.assign(n + m, VarState::AtLower);
        x.assign(n + m, 0.0);
        art_sign.assign(m, 1.0);

        for (std::size_t j = 0; j < n; ++j) {
            if (std::isfinite(lo[j])) {
                x[j] = lo[j];
                state[j] = VarState::AtLower;
            } else if (std::isfinite(hi[j])) {
                x[j] = hi[j];
                state[j] = VarState::AtUpper;
            } else {
                x[j] = 0.0;
                state[j] = VarState::Free;
            }
        }
        // residual fixes the artificial signs; artificials form the start basis
        Vector r = p.eq_b;
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += p.eq_a(i, j) * x[j];
            r[i] -= s;
        }
        basis.resize(m);
        binv = Matrix(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            art_sign[i] = (r[i] >= 0.0) ? 1.0 : -1.0;
            lo.push_back(0.0);
            hi.push_back(kInf);
            basis[i] = n + i;
            state[n + i] = VarState::Basic;
            x[n + i] = std::abs(r[i]);
            binv(i, i) = art_sign[i];
        }
    }

    double column(std::size_t row, std::size_t var) const {
        if (var < n) return p.eq_a(row, var);
        return (var - n == row) ? art_sign[var - n] : 0.0;
    }

    Vector binv_column(std::size_t var) const {
        Vector w(m, 0.0);
        if (var < n) {
            for (std::size_t i = 0; i < m; ++i) {
                double s = 0.0;
                for (std::size_t k = 0; k < m; ++k) s += binv(i, k) * p.eq_a(k, var);
                w[i] = s;
            }
        } else {
            const std::size_t r = var - n;
            for (std::size_t i = 0; i < m; ++i) w[i] = binv(i, r) * art_sign[r];
        }
        return w;
    }

    void recompute_basics() {
        Vector rhs = p.eq_b;
        for (std::size_t j = 0; j < n + m; ++j) {
            if (state[j] == VarState::Basic || x[j] == 0.0) continue;
            for (std::size_t i = 0; i < m; ++i) rhs[i] -= column(i, j) * x[j];
        }
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) s += binv(i, k) * rhs[k];
            x[basis[i]] = s;
        }
    }

    void refactor() {
        Matrix b(m, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < m; ++k) b(i, k) = column(i, basis[k]);
        LuFactors f = lu_factor(b);
        for (std::size_t c = 0; c < m; ++c) {
            Vector e(m, 0.0);
            e[c] = 1.0;
            Vector col = lu_solve(f, e);
            for (std::size_t i = 0; i < m; ++i) binv(i, c) = col[i];
        }
        recompute_basics();
    }

    Vector prices(const Vector& cost) const {
        Vector y(m, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            const double cb = cost[basis[k]];
            if (cb == 0.0) continue;
            for (std::size_t i = 0; i < m; ++i) y[i] += cb * binv(k, i);
        }
        return y;
    }

    double reduced_cost(const Vector& cost, const Vector& y, std::size_t j) const {
        double d = cost[j];
        if (j < n) {
            for (std::size_t i = 0; i < m; ++i) d -= y[i] * p.eq_a(i, j);
        } else {
            d -= y[j - n] * art_sign[j - n];
        }
        return d;
    }

    // Iterates until optimal for the given cost; returns false when unbounded.
    bool optimize(const Vector& cost) {
        const int iter_cap = 200 * static_cast<int>(n + m + 10);
        for (;;) {
            if (iterations > iter_cap) throw Error("solve_lp: iteration cap exceeded");
            if (iterations > 0 && iterations % kRefactorEvery == 0) refactor();

            const Vector y = prices(cost);

            // pricing
            std::size_t enter = n + m;
            double enter_sigma = 0.0;
            double best = kCostTol;
            for (std::size_t j = 0; j < n + m; ++j) {
                if (state[j] == VarState::Basic) continue;
                if (lo[j] == hi[j] && std::isfinite(lo[j])) continue;  // pinned
                const double d = reduced_cost(cost, y, j);
                double sigma = 0.0;
                if ((state[j] == VarState::AtLower || state[j] == VarState::Free) && d > kCostTol)
                    sigma = 1.0;
                else if ((state[j] == VarState::AtUpper || state[j] == VarState::Free) && d < -kCostTol)
                    sigma = -1.0;
                if (sigma == 0.0) continue;
                if (bland) {
                    enter = j;
                    enter_sigma = sigma;
                    break;
                }
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    enter = j;
                    enter_sigma = sigma;
                }
            }
            if (enter == n + m) return true;  // optimal for this cost

            const Vector w = binv_column(enter);

            // ratio test over basic variables
            double t_basic = kInf;
            std::size_t leave_pos = m;
            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t bv = basis[i];
                const double delta = -enter_sigma * w[i];  // rate of change of x[bv]
                if (std::abs(delta) <= kPivotTol) continue;
                double t;
                if (delta > 0.0) {
                    if (!std::isfinite(hi[bv])) continue;
                    t = (hi[bv] - x[bv]) / delta;
                } else {
                    if (!std::isfinite(lo[bv])) continue;
                    t = (x[bv] - lo[bv]) / (-delta);
                }
                t = std::max(t, 0.0);
                bool better;
                if (leave_pos == m || t < t_basic - 1e-12) {
                    better = true;
                } else if (t <= t_basic + 1e-12) {
                    if (bland) {
                        better = bv < basis[leave_pos];
                    } else {
                        const double cur = std::abs(w[leave_pos]);
                        better = std::abs(w[i]) > cur + 1e-12 ||
                                 (std::abs(std::abs(w[i]) - cur) <= 1e-12 && bv < basis[leave_pos]);
                    }
                } else {
                    better = false;
                }
                if (better) {
                    t_basic = std::min(t, t_basic);
                    leave_pos = i;
                }
            }

            double t_flip = kInf;
            if (std::isfinite(lo[enter]) && std::isfinite(hi[enter])) t_flip = hi[enter] - lo[enter];

            const double t = std::min(t_basic, t_flip);
            if (!std::isfinite(t)) return false;  // unbounded

            ++iterations;
            degenerate_streak = (t <= 1e-11) ? degenerate_streak + 1 : 0;
            if (degenerate_streak > 50) bland = true;

            x[enter] += enter_sigma * t;
            for (std::size_t i = 0; i < m; ++i) x[basis[i]] -= enter_sigma * t * w[i];

            if (t_flip <= t_basic) {
                state[enter] = (state[enter] == VarState::AtLower) ? VarState::AtUpper : VarState::AtLower;
                continue;
            }

            // basis change
            const std::size_t out_var = basis[leave_pos];
            const double out_delta = -enter_sigma * w[leave_pos];
            if (out_delta > 0.0) {
                state[out_var] = VarState::AtUpper;
                x[out_var] = hi[out_var];
            } else {
                state[out_var] = VarState::AtLower;
                x[out_var] = lo[out_var];
            }
            basis[leave_pos] = enter;
            state[enter] = VarState::Basic;

            // row operations turn column w into e_{leave_pos}
            const double piv = w[leave_pos];
            for (std::size_t c = 0; c < m; ++c) binv(leave_pos, c) /= piv;
            for (std::size_t i = 0; i < m; ++i) {
                if (i == leave_pos || w[i] == 0.0) continue;
                const double f = w[i];
                for (std::size_t c = 0; c < m; ++c) binv(i, c) -= f * binv(leave_pos, c);
            }
        }
    }
};

}  // namespace

LpResult solve_lp(const LpProblem& p) {
    const std::size_t n = p.objective.size();
    const std::size_t m = p.eq_b.size();
    if (p.lo.size() != n || p.hi.size() != n) throw Error("solve_lp: bound size mismatch");
    if (m > 0 && (p.eq_a.rows() != m || p.eq_a.cols() != n)) throw Error("solve_lp: matrix size mismatch");
    for (std::size_t j = 0; j < n; ++j)
        if (p.lo[j] > p.hi[j] + 1e-12) return {LpStatus::Infeasible, {}, 0.0, {}, 0.0, 0};

    LpResult res;

    if (m == 0) {
        res.z.assign(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double c = p.objective[j];
            if (c > 0.0) {
                if (!std::isfinite(p.hi[j])) return {LpStatus::Unbounded, {}, 0.0, {}, 0.0, 0};
                res.z[j] = p.hi[j];
            } else if (c < 0.0) {
                if (!std::isfinite(p.lo[j])) return {LpStatus::Unbounded, {}, 0.0, {}, 0.0, 0};
                res.z[j] = p.lo[j];
            } else {
                res.z[j] = std::isfinite(p.lo[j]) ? p.lo[j] : (std::isfinite(p.hi[j]) ? p.hi[j] : 0.0);
            }
        }
        res.value = dot(p.objective, res.z);
        return res;
    }

    Simplex s(p);

    // phase 1: drive the artificials to zero
    Vector phase1(n + m, 0.0);
    for (std::size_t i = 0; i < m; ++i) phase1[n + i] = -1.0;
    if (!s.optimize(phase1)) throw Error("solve_lp: phase 1 unbounded");
    double art_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) art_sum += s.x[n + i];
    if (art_sum > 1e-7) {
        res.status = LpStatus::Infeasible;
        res.iterations = s.iterations;
        return res;
    }
    for (std::size_t i = 0; i < m; ++i) {  // pin so they cannot re-enter
        s.lo[n + i] = 0.0;
        s.hi[n + i] = 0.0;
        if (s.state[n + i] != VarState::Basic) s.x[n + i] = 0.0;
    }

    // phase 2
    s.bland = false;
    s.degenerate_streak = 0;
    Vector cost(n + m, 0.0);
    for (std::size_t j = 0; j < n; ++j) cost[j] = p.objective[j];
    const bool bounded = s.optimize(cost);
    res.iterations = s.iterations;
    if (!bounded) {
        res.status = LpStatus::Unbounded;
        return res;
    }

    s.refactor();  // clean values before reporting
    res.z.assign(s.x.begin(), s.x.begin() + static_cast<long>(n));
    res.value = dot(p.objective, res.z);
    res.dual = s.prices(cost);

    // weak-duality certificate: dual objective adds bound terms for nonbasic variables
    double dual_obj = dot(res.dual, p.eq_b);
    for (std::size_t j = 0; j < n; ++j) {
        if (s.state[j] == VarState::Basic) continue;
        const double d = s.reduced_cost(cost, res.dual, j);
        if (std::abs(d) <= kCostTol) continue;
        if (s.state[j] == VarState::AtLower && std::isfinite(p.lo[j]))
            dual_obj += d * p.lo[j];
        else if (s.state[j] == VarState::AtUpper && std::isfinite(p.hi[j]))
            dual_obj += d * p.hi[j];
    }
    res.duality_gap = std::abs(res.value - dual_obj);
    return res;
}

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

}  // namespace gridflex
