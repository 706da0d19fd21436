#include "gridflex/qp.hpp"

#include <algorithm>
#include <cmath>

#include "gridflex/lp.hpp"

namespace gridflex {

namespace {

constexpr double kFeasTol = 1e-8;
constexpr double kDualTol = 1e-9;
constexpr double kStepTol = 1e-11;
constexpr double kBlockTol = 1e-10;
constexpr double kReg = 1e-9;

enum class BState { FreeVar, AtLo, AtHi, Pinned };

// Row-reduces [e | d] in place, dropping dependent rows. Pinned columns must
// already be substituted out. Returns false when the system is inconsistent.
bool reduce_equalities(Matrix& e, Vector& d) {
    const std::size_t m = e.rows(), n = e.cols();
    std::size_t r = 0;
    for (std::size_t c = 0; c < n && r < m; ++c) {
        std::size_t piv = r;
        for (std::size_t i = r + 1; i < m; ++i)
            if (std::abs(e(i, c)) > std::abs(e(piv, c))) piv = i;
        if (std::abs(e(piv, c)) <= 1e-10) continue;
        if (piv != r) {
            for (std::size_t k = 0; k < n; ++k) std::swap(e(r, k), e(piv, k));
            std::swap(d[r], d[piv]);
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r || e(i, c) == 0.0) continue;
            const double f = e(i, c) / e(r, c);
            for (std::size_t k = c; k < n; ++k) e(i, k) -= f * e(r, k);
            e(i, c) = 0.0;
            d[i] -= f * d[r];
        }
        ++r;
    }
    for (std::size_t i = r; i < m; ++i)
        if (std::abs(d[i]) > 1e-8) return false;
    Matrix keep(r, n);
    Vector keepb(r);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t k = 0; k < n; ++k) keep(i, k) = e(i, k);
        keepb[i] = d[i];
    }
    e = std::move(keep);
    d = std::move(keepb);
    return true;
}

bool feasible_enough(const QpProblem& p, const Matrix& eq, const Vector& eqb, const Vector& z) {
    const std::size_t n = p.g.size();
    if (z.size() != n) return false;
    for (std::size_t j = 0; j < n; ++j)
        if (z[j] < p.lo[j] - kFeasTol || z[j] > p.hi[j] + kFeasTol) return false;
    for (std::size_t i = 0; i < eqb.size(); ++i) {
        double s = -eqb[i];
        for (std::size_t j = 0; j < n; ++j) s += eq(i, j) * z[j];
        if (std::abs(s) > kFeasTol) return false;
    }
    for (std::size_t i = 0; i < p.in_b.size(); ++i) {
        double s = -p.in_b[i];
        for (std::size_t j = 0; j < n; ++j) s += p.in_a(i, j) * z[j];
        if (s > kFeasTol) return false;
    }
    return true;
}

// Feasibility LP: slack out the inequality rows and let simplex phase 1 work.
bool lp_feasible_point(const QpProblem& p, const Matrix& eq, const Vector& eqb, Vector& z) {
    const std::size_t n = p.g.size(), me = eqb.size(), mi = p.in_b.size();
    LpProblem lp;
    lp.objective.assign(n + mi, 0.0);
    lp.eq_a = Matrix(me + mi, n + mi);
    lp.eq_b.assign(me + mi, 0.0);
    for (std::size_t i = 0; i < me; ++i) {
        for (std::size_t j = 0; j < n; ++j) lp.eq_a(i, j) = eq(i, j);
        lp.eq_b[i] = eqb[i];
    }
    for (std::size_t i = 0; i < mi; ++i) {
        for (std::size_t j = 0; j < n; ++j) lp.eq_a(me + i, j) = p.in_a(i, j);
        lp.eq_a(me + i, n + i) = 1.0;
        lp.eq_b[me + i] = p.in_b[i];
    }
    lp.lo = p.lo;
    lp.hi = p.hi;
    lp.lo.resize(n + mi, 0.0);
    lp.hi.resize(n + mi, kInf);
    LpResult r = solve_lp(lp);
    if (r.status != LpStatus::Optimal) return false;
    z.assign(r.z.begin(), r.z.begin() + static_cast<long>(n));
    return true;
}

}  // namespace

QpResult solve_qp(const QpProblem& p, const Vector& warm_start) {
    const std::size_t n = p.g.size();
    const std::size_t me0 = p.eq_b.size();
    const std::size_t mi = p.in_b.size();
    if (p.h.rows() != n || p.h.cols() != n) throw Error("solve_qp: hessian size mismatch");
    if (p.lo.size() != n || p.hi.size() != n) throw Error("solve_qp: bound size mismatch");
    if (me0 > 0 && p.eq_a.cols() != n) throw Error("solve_qp: equality size mismatch");
    if (mi > 0 && p.in_a.cols() != n) throw Error("solve_qp: inequality size mismatch");

    QpResult res;

    std::vector<BState> bs(n, BState::FreeVar);
    for (std::size_t j = 0; j < n; ++j) {
        if (p.lo[j] > p.hi[j] + 1e-12) {
            res.status = QpStatus::Infeasible;
            return res;
        }
        if (p.lo[j] == p.hi[j]) bs[j] = BState::Pinned;
    }

    // substitute pinned variables into the equalities, then drop dependent rows
    Matrix eq = p.eq_a;
    Vector eqb = p.eq_b;
    if (me0 == 0) eq = Matrix(0, n);
    for (std::size_t i = 0; i < eqb.size(); ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (bs[j] != BState::Pinned || eq(i, j) == 0.0) continue;
            eqb[i] -= eq(i, j) * p.lo[j];
            eq(i, j) = 0.0;
        }
    }
    if (!reduce_equalities(eq, eqb)) {
        res.status = QpStatus::Infeasible;
        return res;
    }
    const std::size_t me = eqb.size();

    Vector z;
    if (!warm_start.empty() && feasible_enough(p, eq, eqb, warm_start)) {
        z = warm_start;
    } else if (!lp_feasible_point(p, eq, eqb, z)) {
        res.status = QpStatus::Infeasible;
        return res;
    }
    for (std::size_t j = 0; j < n; ++j) z[j] = std::clamp(z[j], p.lo[j], p.hi[j]);

    double hscale = 1.0;
    for (std::size_t j = 0; j < n; ++j) hscale = std::max(hscale, std::abs(p.h(j, j)));
    const double delta = kReg * hscale;

    std::vector<char> in_w(mi, 0);
    std::vector<std::size_t> w_rows;

    auto act_row = [&](std::size_t a, std::size_t j) -> double {
        return a < me ? eq(a, j) : p.in_a(w_rows[a - me], j);
    };
    auto act_rhs = [&](std::size_t a) -> double {
        return a < me ? eqb[a] : p.in_b[w_rows[a - me]];
    };

    Vector mults;        // for eq rows then working rows, in order
    Vector grad(n);      // H z + g at current z

    const int iter_cap = 100 * static_cast<int>(n + mi + me) + 1000;
    int iter = 0;
    for (;; ++iter) {
        if (iter > iter_cap) throw Error("solve_qp: iteration cap exceeded");

        std::vector<std::size_t> fv;
        fv.reserve(n);
        for (std::size_t j = 0; j < n; ++j)
            if (bs[j] == BState::FreeVar) fv.push_back(j);
        const std::size_t nf = fv.size();
        const std::size_t na = me + w_rows.size();

        Vector ztar = z;
        mults.assign(na, 0.0);

        if (nf > 0) {
            Matrix kkt(nf + na, nf + na);
            Vector rhs(nf + na, 0.0);
            for (std::size_t a = 0; a < nf; ++a) {
                const std::size_t ja = fv[a];
                for (std::size_t b = 0; b < nf; ++b) kkt(a, b) = p.h(ja, fv[b]);
                kkt(a, a) += delta;
                double r = -p.g[ja];
                for (std::size_t x = 0; x < n; ++x)
                    if (bs[x] != BState::FreeVar && p.h(ja, x) != 0.0) r -= p.h(ja, x) * z[x];
                rhs[a] = r;
            }
            for (std::size_t a = 0; a < na; ++a) {
                for (std::size_t b = 0; b < nf; ++b) {
                    const double v = act_row(a, fv[b]);
                    kkt(nf + a, b) = v;
                    kkt(b, nf + a) = v;
                }
                double r = act_rhs(a);
                for (std::size_t x = 0; x < n; ++x)
                    if (bs[x] != BState::FreeVar) r -= act_row(a, x) * z[x];
                rhs[nf + a] = r;
            }
            Vector sol = lu_solve(lu_factor(kkt), rhs);
            for (std::size_t a = 0; a < nf; ++a) ztar[fv[a]] = sol[a];
            for (std::size_t a = 0; a < na; ++a) mults[a] = sol[nf + a];
        } else if (na > 0) {
            // all variables at bounds: least-squares multipliers for the checks
            for (std::size_t j = 0; j < n; ++j) {
                grad[j] = p.g[j];
                for (std::size_t k = 0; k < n; ++k) grad[j] += p.h(j, k) * z[k];
            }
            Matrix aat(na, na);
            Vector rhs(na, 0.0);
            for (std::size_t a = 0; a < na; ++a) {
                for (std::size_t b = 0; b < na; ++b) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < n; ++j) s += act_row(a, j) * act_row(b, j);
                    aat(a, b) = s;
                }
                aat(a, a) += 1e-12;
                double s = 0.0;
                for (std::size_t j = 0; j < n; ++j) s += act_row(a, j) * grad[j];
                rhs[a] = -s;
            }
            mults = lu_solve(lu_factor(aat), rhs);
        }

        Vector step(n, 0.0);
        double step_norm = 0.0, z_norm = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            step[j] = ztar[j] - z[j];
            step_norm = std::max(step_norm, std::abs(step[j]));
            z_norm = std::max(z_norm, std::abs(z[j]));
        }

        if (step_norm <= kStepTol * z_norm) {
            // stationary in the working set: test the multiplier signs
            for (std::size_t j = 0; j < n; ++j) {
                grad[j] = p.g[j];
                for (std::size_t k = 0; k < n; ++k)
                    if (p.h(j, k) != 0.0) grad[j] += p.h(j, k) * z[k];
                for (std::size_t a = 0; a < me + w_rows.size(); ++a)
                    grad[j] += mults[a] * act_row(a, j);
            }
            double worst = kDualTol;
            std::size_t drop_id = mi + n;  // G row ids 0..mi-1, bound ids mi..mi+n-1
            for (std::size_t a = 0; a < w_rows.size(); ++a) {
                const double v = -mults[me + a];
                if (v > worst) {
                    worst = v;
                    drop_id = w_rows[a];
                }
            }
            for (std::size_t j = 0; j < n; ++j) {
                double v = 0.0;
                if (bs[j] == BState::AtLo) v = -grad[j];
                else if (bs[j] == BState::AtHi) v = grad[j];
                else continue;
                if (v > worst) {
                    worst = v;
                    drop_id = mi + j;
                }
            }
            if (drop_id == mi + n) break;  // optimal
            if (drop_id < mi) {
                in_w[drop_id] = 0;
                w_rows.erase(std::find(w_rows.begin(), w_rows.end(), drop_id));
            } else {
                bs[drop_id - mi] = BState::FreeVar;
            }
            continue;
        }

        // line search toward ztar; lowest id wins ties among blockers
        double alpha = 1.0;
        std::size_t block_id = mi + n;
        for (std::size_t i = 0; i < mi; ++i) {
            if (in_w[i]) continue;
            double s = 0.0, v = -p.in_b[i];
            for (std::size_t j = 0; j < n; ++j) {
                s += p.in_a(i, j) * step[j];
                v += p.in_a(i, j) * z[j];
            }
            if (s <= kBlockTol) continue;
            const double a = std::max(0.0, -v / s);
            if (a < alpha - 1e-12) {
                alpha = a;
                block_id = i;
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (bs[j] != BState::FreeVar || std::abs(step[j]) <= kBlockTol) continue;
            double a = kInf;
            if (step[j] > 0.0 && std::isfinite(p.hi[j])) a = (p.hi[j] - z[j]) / step[j];
            else if (step[j] < 0.0 && std::isfinite(p.lo[j])) a = (p.lo[j] - z[j]) / step[j];
            a = std::max(a, 0.0);
            if (a < alpha - 1e-12) {
                alpha = a;
                block_id = mi + j;
            }
        }

        for (std::size_t j = 0; j < n; ++j) z[j] += alpha * step[j];
        if (block_id < mi) {
            in_w[block_id] = 1;
            w_rows.push_back(block_id);
        } else if (block_id < mi + n) {
            const std::size_t j = block_id - mi;
            if (step[j] > 0.0) {
                bs[j] = BState::AtHi;
                z[j] = p.hi[j];
            } else {
                bs[j] = BState::AtLo;
                z[j] = p.lo[j];
            }
        }
    }

    res.z = z;
    res.iterations = iter;
    res.value = 0.5 * dot(z, mat_vec(p.h, z)) + dot(p.g, z);

    // KKT certificate with the unregularized data
    double kkt = 0.0;
    for (std::size_t i = 0; i < me; ++i) {
        double s = -eqb[i];
        for (std::size_t j = 0; j < n; ++j) s += eq(i, j) * z[j];
        kkt = std::max(kkt, std::abs(s));
    }
    for (std::size_t i = 0; i < mi; ++i) {
        double s = -p.in_b[i];
        for (std::size_t j = 0; j < n; ++j) s += p.in_a(i, j) * z[j];
        kkt = std::max(kkt, s);
    }
    for (std::size_t j = 0; j < n; ++j) {
        kkt = std::max(kkt, p.lo[j] - z[j]);
        kkt = std::max(kkt, z[j] - p.hi[j]);
    }
    for (std::size_t a = 0; a < w_rows.size(); ++a)
        kkt = std::max(kkt, -mults[me + a]);
    for (std::size_t j = 0; j < n; ++j) {
        double r = p.g[j];
        for (std::size_t k = 0; k < n; ++k)
            if (p.h(j, k) != 0.0) r += p.h(j, k) * z[k];
        for (std::size_t a = 0; a < me + w_rows.size(); ++a)
            r += mults[a] * act_row(a, j);
        if (bs[j] == BState::FreeVar) kkt = std::max(kkt, std::abs(r));
        else if (bs[j] == BState::AtLo) kkt = std::max(kkt, -r);
        else if (bs[j] == BState::AtHi) kkt = std::max(kkt, r);
    }
    res.kkt_residual = kkt;
    return res;
}

const char* to_string(QpStatus s) {
    switch (s) {
        case QpStatus::Optimal: return "optimal";
        case QpStatus::Infeasible: return "infeasible";
    }
    return "unknown";
}

}  // namespace gridflex
