#include "gridflex/aggregation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <utility>

#include "gridflex/lp.hpp"

namespace gridflex {

namespace {

constexpr std::size_t kNoCol = static_cast<std::size_t>(-1);
constexpr double kPivotTol = 1e-9;
constexpr double kConsistencyTol = 1e-8;
constexpr double kRedundancyTol = 1e-9;

bool both_infinite(double lo, double hi) { return !std::isfinite(lo) && !std::isfinite(hi); }

}  // namespace

CouplingSpace step_coupling_space(const LinearModel& model, double dt_hours) {
    CouplingSpace s;
    s.dt_hours = dt_hours;
    s.labels.assign(model.col_names.begin(),
                    model.col_names.begin() + static_cast<std::ptrdiff_t>(model.nx));
    return s;
}

CouplingSpace schedule_coupling_space(std::size_t horizon, double dt_hours) {
    CouplingSpace s;
    s.dt_hours = dt_hours;
    for (std::size_t t = 1; t <= horizon; ++t) s.labels.push_back("P_pcc[" + std::to_string(t) + "]");
    for (std::size_t t = 1; t <= horizon; ++t) s.labels.push_back("E_agg[" + std::to_string(t) + "]");
    return s;
}

const char* to_string(EnvelopeKind kind) {
    return kind == EnvelopeKind::Outer ? "outer" : "exact";
}

bool envelope_contains(const FlexibilityEnvelope& env, const Vector& x, double slack) {
    if (x.size() != env.dims()) throw Error("point dimension does not match the envelope");
    for (const Halfspace& hs : env.halfspaces)
        if (dot(hs.n, x) > hs.h + slack) return false;
    return true;
}

ReducedModel reduce_model(const LinearModel& model) {
    const std::size_t m = model.rows.rows();
    const std::size_t nc = model.cols();
    Matrix a = model.rows;
    Vector rhs = model.c;

    ReducedModel red;
    std::vector<std::size_t> pivot_col(m, kNoCol);
    std::vector<bool> determined(nc, false);

    for (std::size_t r = 0; r < m; ++r) {
        // prefer eliminating columns without box bounds so the free block
        // keeps finite boxes and the pruned rows stay interval-checkable
        std::size_t best = kNoCol;
        double best_mag = 0.0;
        bool best_unboxed = false;
        for (std::size_t k = 0; k < nc; ++k) {
            if (determined[k]) continue;
            const double mag = std::abs(a(r, k));
            if (mag <= kPivotTol) continue;
            const bool unboxed = both_infinite(model.lo[k], model.hi[k]) && mag > 1e-6;
            if (best == kNoCol || (unboxed && !best_unboxed) ||
                (unboxed == best_unboxed && mag > best_mag)) {
                best = k;
                best_mag = mag;
                best_unboxed = unboxed;
            }
        }
        if (best == kNoCol) {
            if (std::abs(rhs[r]) > kConsistencyTol) red.feasible = false;
            continue;
        }
        const double piv = a(r, best);
        for (std::size_t k = 0; k < nc; ++k) a(r, k) /= piv;
        rhs[r] /= piv;
        a(r, best) = 1.0;
        for (std::size_t rr = 0; rr < m; ++rr) {
            if (rr == r) continue;
            const double f = a(rr, best);
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < nc; ++k) a(rr, k) -= f * a(r, k);
            a(rr, best) = 0.0;
            rhs[rr] -= f * rhs[r];
        }
        pivot_col[r] = best;
        determined[best] = true;
    }

    for (std::size_t k = 0; k < nc; ++k)
        if (!determined[k]) red.free_cols.push_back(k);
    const std::size_t nf = red.free_cols.size();

    red.recon = Matrix(nc, nf);
    red.recon_const = Vector(nc, 0.0);
    for (std::size_t f = 0; f < nf; ++f) red.recon(red.free_cols[f], f) = 1.0;
    for (std::size_t r = 0; r < m; ++r) {
        if (pivot_col[r] == kNoCol) continue;
        const std::size_t p = pivot_col[r];
        red.recon_const[p] = rhs[r];
        for (std::size_t f = 0; f < nf; ++f) red.recon(p, f) = -a(r, red.free_cols[f]);
    }

    red.lo.resize(nf);
    red.hi.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        red.lo[f] = model.lo[red.free_cols[f]];
        red.hi[f] = model.hi[red.free_cols[f]];
    }

    // box bounds of eliminated columns become inequalities over the free
    // block; rows that can never bind on the free box are dropped, rows that
    // can never hold mark the model infeasible
    std::vector<Vector> rows;
    Vector bounds;
    const auto add_ineq = [&](const Vector& w, double bnd) {
        double ub = 0.0, lb = 0.0;
        for (std::size_t f = 0; f < nf; ++f) {
            if (w[f] == 0.0) continue;
            ub += w[f] > 0.0 ? w[f] * red.hi[f] : w[f] * red.lo[f];
            lb += w[f] > 0.0 ? w[f] * red.lo[f] : w[f] * red.hi[f];
        }
        if (ub <= bnd + kRedundancyTol) return;
        if (lb > bnd + kConsistencyTol) red.feasible = false;
        rows.push_back(w);
        bounds.push_back(bnd);
    };
    for (std::size_t r = 0; r < m; ++r) {
        if (pivot_col[r] == kNoCol) continue;
        const std::size_t p = pivot_col[r];
        if (both_infinite(model.lo[p], model.hi[p])) continue;
        Vector w(nf, 0.0);
        for (std::size_t f = 0; f < nf; ++f) w[f] = -a(r, red.free_cols[f]);
        if (std::isfinite(model.hi[p])) add_ineq(w, model.hi[p] - red.recon_const[p]);
        if (std::isfinite(model.lo[p])) {
            Vector neg(nf, 0.0);
            for (std::size_t f = 0; f < nf; ++f) neg[f] = -w[f];
            add_ineq(neg, red.recon_const[p] - model.lo[p]);
        }
    }
    red.in_a = Matrix(rows.size(), nf);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t f = 0; f < nf; ++f) red.in_a(r, f) = rows[r][f];
    red.in_b = std::move(bounds);
    return red;
}

Vector reconstruct(const ReducedModel& red, const Vector& z_free) {
    if (z_free.size() != red.free_cols.size()) throw Error("free vector size mismatch");
    Vector full(red.recon.rows(), 0.0);
    for (std::size_t k = 0; k < red.recon.rows(); ++k) {
        double v = red.recon_const[k];
        for (std::size_t f = 0; f < z_free.size(); ++f) v += red.recon(k, f) * z_free[f];
        full[k] = v;
    }
    return full;
}

std::vector<Vector> evenly_spaced_directions(std::size_t count) {
    std::vector<Vector> dirs;
    dirs.reserve(count);
    const double two_pi = 2.0 * std::acos(-1.0);
    for (std::size_t k = 0; k < count; ++k) {
        const double angle = two_pi * static_cast<double>(k) / static_cast<double>(count);
        dirs.push_back({std::cos(angle), std::sin(angle)});
    }
    return dirs;
}

namespace {

// LP skeleton over a reduced model: free variables plus one slack per
// inequality row, so the bounded simplex sees only equalities and boxes.
struct ReducedLp {
    std::size_t nf = 0, ms = 0;
    LpProblem base;

    explicit ReducedLp(const ReducedModel& red) {
        nf = red.free_cols.size();
        ms = red.in_a.rows();
        base.eq_a = Matrix(ms, nf + ms);
        for (std::size_t r = 0; r < ms; ++r) {
            for (std::size_t f = 0; f < nf; ++f) base.eq_a(r, f) = red.in_a(r, f);
            base.eq_a(r, nf + r) = 1.0;
        }
        base.eq_b = red.in_b;
        base.lo.assign(nf + ms, 0.0);
        base.hi.assign(nf + ms, kInf);
        for (std::size_t f = 0; f < nf; ++f) {
            base.lo[f] = red.lo[f];
            base.hi[f] = red.hi[f];
        }
        base.objective.assign(nf + ms, 0.0);
    }

    LpResult maximize(const Vector& obj_free) const {
        LpProblem p = base;
        for (std::size_t f = 0; f < nf; ++f) p.objective[f] = obj_free[f];
        return solve_lp(p);
    }
};

double column_value(const ReducedModel& red, std::size_t col, const Vector& z) {
    double v = red.recon_const[col];
    for (std::size_t f = 0; f < red.free_cols.size(); ++f) v += red.recon(col, f) * z[f];
    return v;
}

FlexibilityEnvelope project_support_reduced(const LinearModel& model, const ReducedModel& red,
                                            const CouplingSpace& space,
                                            const std::vector<Vector>& directions) {
    if (space.dims() != model.nx) throw Error("coupling space does not match the model");
    if (!red.feasible) throw Error("infeasible model");

    const ReducedLp lp(red);
    FlexibilityEnvelope env;
    env.kind = EnvelopeKind::Outer;
    env.labels = space.labels;
    env.dt_hours = space.dt_hours;
    env.provenance = to_string(model.kind);

    Vector avg(model.nx, 0.0);
    std::size_t optima = 0;
    for (const Vector& dir : directions) {
        if (dir.size() != model.nx) throw Error("direction dimension mismatch");
        const double nrm = std::sqrt(dot(dir, dir));
        if (nrm <= 1e-12) {
            ++env.dropped_directions;
            continue;
        }
        Vector obj(lp.nf, 0.0);
        double cst = 0.0;
        for (std::size_t k = 0; k < model.nx; ++k) {
            cst += dir[k] * red.recon_const[k];
            for (std::size_t f = 0; f < lp.nf; ++f) obj[f] += dir[k] * red.recon(k, f);
        }
        const LpResult res = lp.maximize(obj);
        if (res.status == LpStatus::Infeasible) throw Error("infeasible model");
        if (res.status == LpStatus::Unbounded) {
            ++env.dropped_directions;
            continue;
        }
        Halfspace hs;
        hs.n.resize(model.nx);
        for (std::size_t k = 0; k < model.nx; ++k) hs.n[k] = dir[k] / nrm;
        hs.h = (res.value + cst) / nrm;
        env.halfspaces.push_back(std::move(hs));
        for (std::size_t k = 0; k < model.nx; ++k) avg[k] += column_value(red, k, res.z);
        ++optima;
    }
    if (optima > 0) {
        for (double& v : avg) v /= static_cast<double>(optima);
        env.feasible_point = std::move(avg);
    }
    return env;
}

// Closest feasible (P_pcc, C_agg) to the requested aggregate charge, found by
// minimizing the absolute deviation with split slack variables.
std::optional<std::pair<double, double>> step_coupling_point(const ReducedModel& red,
                                                             double target_c) {
    if (!red.feasible) return std::nullopt;
    const std::size_t nf = red.free_cols.size();
    const std::size_t ms = red.in_a.rows();
    const std::size_t nv = nf + ms + 2;

    LpProblem p;
    p.eq_a = Matrix(ms + 1, nv);
    p.eq_b.assign(ms + 1, 0.0);
    for (std::size_t r = 0; r < ms; ++r) {
        for (std::size_t f = 0; f < nf; ++f) p.eq_a(r, f) = red.in_a(r, f);
        p.eq_a(r, nf + r) = 1.0;
        p.eq_b[r] = red.in_b[r];
    }
    for (std::size_t f = 0; f < nf; ++f) p.eq_a(ms, f) = red.recon(1, f);
    p.eq_a(ms, nf + ms) = 1.0;
    p.eq_a(ms, nf + ms + 1) = -1.0;
    p.eq_b[ms] = target_c - red.recon_const[1];

    p.lo.assign(nv, 0.0);
    p.hi.assign(nv, kInf);
    for (std::size_t f = 0; f < nf; ++f) {
        p.lo[f] = red.lo[f];
        p.hi[f] = red.hi[f];
    }
    p.objective.assign(nv, 0.0);
    p.objective[nf + ms] = -1.0;
    p.objective[nf + ms + 1] = -1.0;

    const LpResult res = solve_lp(p);
    if (res.status != LpStatus::Optimal) return std::nullopt;
    return std::make_pair(column_value(red, 0, res.z), column_value(red, 1, res.z));
}

}  // namespace

FlexibilityEnvelope project_support(const LinearModel& model, const CouplingSpace& space,
                                    const std::vector<Vector>& directions) {
    return project_support_reduced(model, reduce_model(model), space, directions);
}

Vector nearest_model_point(const LinearModel& model, const Vector& coupling_target) {
    if (coupling_target.size() != model.nx) throw Error("coupling target size mismatch");
    const ReducedModel red = reduce_model(model);
    if (!red.feasible) throw Error("infeasible model");
    const std::size_t nf = red.free_cols.size();
    const std::size_t ms = red.in_a.rows();
    const std::size_t nx = model.nx;
    const std::size_t nv = nf + ms + 2 * nx;

    LpProblem p;
    p.eq_a = Matrix(ms + nx, nv);
    p.eq_b.assign(ms + nx, 0.0);
    for (std::size_t r = 0; r < ms; ++r) {
        for (std::size_t f = 0; f < nf; ++f) p.eq_a(r, f) = red.in_a(r, f);
        p.eq_a(r, nf + r) = 1.0;
        p.eq_b[r] = red.in_b[r];
    }
    for (std::size_t k = 0; k < nx; ++k) {
        for (std::size_t f = 0; f < nf; ++f) p.eq_a(ms + k, f) = red.recon(k, f);
        p.eq_a(ms + k, nf + ms + 2 * k) = 1.0;
        p.eq_a(ms + k, nf + ms + 2 * k + 1) = -1.0;
        p.eq_b[ms + k] = coupling_target[k] - red.recon_const[k];
    }
    p.lo.assign(nv, 0.0);
    p.hi.assign(nv, kInf);
    for (std::size_t f = 0; f < nf; ++f) {
        p.lo[f] = red.lo[f];
        p.hi[f] = red.hi[f];
    }
    p.objective.assign(nv, 0.0);
    for (std::size_t d = nf + ms; d < nv; ++d) p.objective[d] = -1.0;

    const LpResult res = solve_lp(p);
    if (res.status != LpStatus::Optimal) throw Error("coupling pin LP failed");
    Vector z_free(nf);
    for (std::size_t f = 0; f < nf; ++f) z_free[f] = res.z[f];
    return reconstruct(red, z_free);
}

namespace {

struct FmRow {
    Vector a;
    double b = 0.0;
};

void fm_check_zero_row(const FmRow& row) {
    if (row.b < -kRedundancyTol) throw Error("infeasible model");
}

// normalize rows, drop vacuous ones, merge duplicates keeping the tighter bound
void fm_dedup(std::vector<FmRow>& rows) {
    std::vector<FmRow> out;
    for (FmRow& r : rows) {
        const double nrm = std::sqrt(dot(r.a, r.a));
        if (nrm <= 1e-11) {
            fm_check_zero_row(r);
            continue;
        }
        for (double& v : r.a) v /= nrm;
        r.b /= nrm;
        out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(), [](const FmRow& x, const FmRow& y) {
        return std::lexicographical_compare(x.a.begin(), x.a.end(), y.a.begin(), y.a.end());
    });
    rows.clear();
    for (FmRow& r : out) {
        if (!rows.empty()) {
            double diff = 0.0;
            for (std::size_t k = 0; k < r.a.size(); ++k)
                diff = std::max(diff, std::abs(r.a[k] - rows.back().a[k]));
            if (diff <= 1e-9) {
                rows.back().b = std::min(rows.back().b, r.b);
                continue;
            }
        }
        rows.push_back(std::move(r));
    }
}

// one Fourier-Motzkin elimination step, preferring equality substitution
void fm_eliminate(std::vector<FmRow>& eqs, std::vector<FmRow>& ins, std::size_t v) {
    std::size_t best = kNoCol;
    double best_mag = kPivotTol;
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        const double mag = std::abs(eqs[i].a[v]);
        if (mag > best_mag) {
            best = i;
            best_mag = mag;
        }
    }
    if (best != kNoCol) {
        FmRow sub = eqs[best];
        eqs.erase(eqs.begin() + static_cast<std::ptrdiff_t>(best));
        const double piv = sub.a[v];
        for (double& c : sub.a) c /= piv;
        sub.b /= piv;
        const auto apply = [&](FmRow& row) {
            const double f = row.a[v];
            if (f == 0.0) return;
            for (std::size_t k = 0; k < row.a.size(); ++k) row.a[k] -= f * sub.a[k];
            row.a[v] = 0.0;
            row.b -= f * sub.b;
        };
        for (FmRow& row : eqs) apply(row);
        for (FmRow& row : ins) apply(row);
        return;
    }

    std::vector<FmRow> zero, pos, neg;
    for (FmRow& row : ins) {
        if (std::abs(row.a[v]) <= kPivotTol) {
            row.a[v] = 0.0;
            zero.push_back(std::move(row));
        } else if (row.a[v] > 0.0) {
            pos.push_back(std::move(row));
        } else {
            neg.push_back(std::move(row));
        }
    }
    if (pos.size() * neg.size() > 200000) throw Error("fourier-motzkin elimination blew up");
    ins = std::move(zero);
    for (const FmRow& rp : pos) {
        for (const FmRow& rn : neg) {
            const double ap = rp.a[v];
            const double an = -rn.a[v];
            FmRow combo;
            combo.a.resize(rp.a.size());
            for (std::size_t k = 0; k < rp.a.size(); ++k)
                combo.a[k] = rp.a[k] / ap + rn.a[k] / an;
            combo.a[v] = 0.0;
            combo.b = rp.b / ap + rn.b / an;
            ins.push_back(std::move(combo));
        }
    }
    fm_dedup(ins);
}

// maximize obj over the kept halfspaces (free variables plus slacks)
LpResult maximize_over_halfspaces(const std::vector<Halfspace>& rows,
                                  const std::vector<bool>& kept, std::size_t skip,
                                  const Vector& obj) {
    const std::size_t dims = obj.size();
    std::vector<std::size_t> act;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (kept[i] && i != skip) act.push_back(i);
    const std::size_t m = act.size();
    LpProblem p;
    p.eq_a = Matrix(m, dims + m);
    p.eq_b.assign(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t k = 0; k < dims; ++k) p.eq_a(r, k) = rows[act[r]].n[k];
        p.eq_a(r, dims + r) = 1.0;
        p.eq_b[r] = rows[act[r]].h;
    }
    p.lo.assign(dims + m, 0.0);
    p.hi.assign(dims + m, kInf);
    for (std::size_t k = 0; k < dims; ++k) {
        p.lo[k] = -kInf;
        p.hi[k] = kInf;
    }
    p.objective.assign(dims + m, 0.0);
    for (std::size_t k = 0; k < dims; ++k) p.objective[k] = obj[k];
    return solve_lp(p);
}

}  // namespace

FlexibilityEnvelope project_fourier_motzkin(const LinearModel& model, const CouplingSpace& space,
                                            std::size_t variable_cap) {
    if (space.dims() != model.nx) throw Error("coupling space does not match the model");
    if (model.cols() > variable_cap)
        throw Error("model exceeds the fourier-motzkin variable cap of " +
                    std::to_string(variable_cap));

    const std::size_t nc = model.cols();
    std::vector<FmRow> eqs, ins;
    for (std::size_t r = 0; r < model.rows.rows(); ++r) {
        FmRow row;
        row.a.resize(nc);
        for (std::size_t k = 0; k < nc; ++k) row.a[k] = model.rows(r, k);
        row.b = model.c[r];
        eqs.push_back(std::move(row));
    }
    for (std::size_t k = 0; k < nc; ++k) {
        if (std::isfinite(model.hi[k])) {
            FmRow row;
            row.a.assign(nc, 0.0);
            row.a[k] = 1.0;
            row.b = model.hi[k];
            ins.push_back(std::move(row));
        }
        if (std::isfinite(model.lo[k])) {
            FmRow row;
            row.a.assign(nc, 0.0);
            row.a[k] = -1.0;
            row.b = -model.lo[k];
            ins.push_back(std::move(row));
        }
    }

    for (std::size_t v = nc; v-- > model.nx;) fm_eliminate(eqs, ins, v);

    // surviving rows live on the coupling block; equalities become opposing
    // halfspace pairs
    std::vector<Halfspace> rows;
    const auto compress = [&](const FmRow& r) {
        Halfspace hs;
        hs.n.assign(r.a.begin(), r.a.begin() + static_cast<std::ptrdiff_t>(model.nx));
        hs.h = r.b;
        return hs;
    };
    for (const FmRow& r : eqs) {
        Halfspace hs = compress(r);
        const double nrm = std::sqrt(dot(hs.n, hs.n));
        if (nrm <= 1e-11) {
            if (std::abs(hs.h) > kRedundancyTol) throw Error("infeasible model");
            continue;
        }
        Halfspace opp;
        opp.n = hs.n;
        opp.h = -hs.h;
        for (double& c : opp.n) c = -c;
        for (Halfspace* h : {&hs, &opp}) {
            for (double& c : h->n) c /= nrm;
            h->h /= nrm;
        }
        rows.push_back(std::move(hs));
        rows.push_back(std::move(opp));
    }
    for (const FmRow& r : ins) {
        Halfspace hs = compress(r);
        const double nrm = std::sqrt(dot(hs.n, hs.n));
        if (nrm <= 1e-11) {
            if (hs.h < -kRedundancyTol) throw Error("infeasible model");
            continue;
        }
        for (double& c : hs.n) c /= nrm;
        hs.h /= nrm;
        rows.push_back(std::move(hs));
    }

    // a halfspace goes iff the others already enforce it
    std::vector<bool> kept(rows.size(), true);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const LpResult res = maximize_over_halfspaces(rows, kept, i, rows[i].n);
        if (res.status == LpStatus::Infeasible) throw Error("infeasible model");
        if (res.status == LpStatus::Optimal && res.value <= rows[i].h + kRedundancyTol)
            kept[i] = false;
    }

    FlexibilityEnvelope env;
    env.kind = EnvelopeKind::Exact;
    env.labels = space.labels;
    env.dt_hours = space.dt_hours;
    env.provenance = to_string(model.kind);
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (kept[i]) env.halfspaces.push_back(std::move(rows[i]));

    {
        const std::vector<bool> all(env.halfspaces.size(), true);
        const LpResult res = maximize_over_halfspaces(env.halfspaces, all, env.halfspaces.size(),
                                                      Vector(model.nx, 0.0));
        if (res.status == LpStatus::Infeasible) throw Error("infeasible model");
        if (res.status == LpStatus::Optimal)
            env.feasible_point.assign(res.z.begin(),
                                      res.z.begin() + static_cast<std::ptrdiff_t>(model.nx));
    }
    return env;
}

FlexibilityEnvelope build_envelope(const Network& net, ModelKind kind,
                                   const PowerFlowState* base, const DayProfile& profiles,
                                   std::size_t horizon, std::size_t directions) {
    if (horizon == 0) throw Error("horizon must be positive");
    if (profiles.steps() < horizon) throw Error("profiles do not cover the horizon");
    if (directions < 4) throw Error("at least 4 projection directions required");

    const double dt = profiles.dt_hours;
    const double cap = net.storage_energy_capacity();
    double e0 = 0.0, ef = 0.0;
    for (const StorageUnit& s : net.storage) {
        e0 += s.soc_init * s.e_cap;
        ef += s.soc_final * s.e_cap;
    }
    const std::size_t T = horizon;
    const std::vector<Vector> dirs = evenly_spaced_directions(directions);
    const double ramp_c = (ef - e0) / (static_cast<double>(T) * dt);

    struct StepOutcome {
        FlexibilityEnvelope env;
        std::optional<std::pair<double, double>> point;
    };
    std::vector<std::future<StepOutcome>> jobs;
    jobs.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        jobs.push_back(std::async(std::launch::async, [&, t]() {
            const BusInjections fixed =
                base_injections(net, profiles.load_pu[t], profiles.pv_pu[t]);
            const LinearModel model = build_step_model(kind, net, fixed, base);
            const ReducedModel red = reduce_model(model);
            StepOutcome out;
            out.env = project_support_reduced(model, red, step_coupling_space(model, dt), dirs);
            out.point = step_coupling_point(red, ramp_c);
            return out;
        }));
    }

    FlexibilityEnvelope env;
    env.kind = EnvelopeKind::Outer;
    env.labels = schedule_coupling_space(T, dt).labels;
    env.dt_hours = dt;
    env.e_init = e0;
    env.provenance = std::string(to_string(kind)) + "|T=" + std::to_string(T) +
                     "|dirs=" + std::to_string(directions);

    Vector point(2 * T, 0.0);
    bool have_point = true;
    double e_run = e0;
    for (std::size_t t = 0; t < T; ++t) {
        StepOutcome out = jobs[t].get();
        env.dropped_directions += out.env.dropped_directions;
        for (const Halfspace& hs : out.env.halfspaces) {
            Halfspace g;
            g.n.assign(2 * T, 0.0);
            g.n[t] = hs.n[0];
            g.n[T + t] += hs.n[1] / dt;
            g.h = hs.h;
            if (t == 0)
                g.h += (hs.n[1] / dt) * e0;
            else
                g.n[T + t - 1] -= hs.n[1] / dt;
            env.halfspaces.push_back(std::move(g));
        }
        if (out.point) {
            point[t] = out.point->first;
            e_run += dt * out.point->second;
            point[T + t] = e_run;
        } else {
            have_point = false;
        }
    }

    // aggregate capacity band per step, final energy pinned by soc_final
    for (std::size_t t = 0; t < T; ++t) {
        const bool last = t + 1 == T;
        Halfspace up, dn;
        up.n.assign(2 * T, 0.0);
        dn.n.assign(2 * T, 0.0);
        up.n[T + t] = 1.0;
        dn.n[T + t] = -1.0;
        up.h = last ? ef : cap;
        dn.h = last ? -ef : 0.0;
        env.halfspaces.push_back(std::move(up));
        env.halfspaces.push_back(std::move(dn));
    }

    if (have_point) env.feasible_point = std::move(point);
    return env;
}

std::string envelope_to_json(const FlexibilityEnvelope& env) {
    nlohmann::json j;
    nlohmann::json hs = nlohmann::json::array();
    for (const Halfspace& h : env.halfspaces) hs.push_back({{"n", h.n}, {"h", h.h}});
    j["halfspaces"] = std::move(hs);
    j["labels"] = env.labels;
    j["kind"] = to_string(env.kind);
    j["provenance"] = env.provenance;
    j["dt_hours"] = env.dt_hours;
    j["e_init"] = env.e_init;
    j["feasible_point"] = env.feasible_point;
    j["dropped_directions"] = env.dropped_directions;
    return j.dump(2) + "\n";
}

FlexibilityEnvelope envelope_from_json(const std::string& text) {
    FlexibilityEnvelope env;
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        for (const auto& hj : j.at("halfspaces")) {
            Halfspace hs;
            hs.n = hj.at("n").get<Vector>();
            hs.h = hj.at("h").get<double>();
            env.halfspaces.push_back(std::move(hs));
        }
        env.labels = j.at("labels").get<std::vector<std::string>>();
        if (j.contains("kind"))
            env.kind = j["kind"] == "exact" ? EnvelopeKind::Exact : EnvelopeKind::Outer;
        if (j.contains("provenance")) env.provenance = j["provenance"].get<std::string>();
        if (j.contains("dt_hours")) env.dt_hours = j["dt_hours"].get<double>();
        if (j.contains("e_init")) env.e_init = j["e_init"].get<double>();
        if (j.contains("feasible_point")) env.feasible_point = j["feasible_point"].get<Vector>();
        if (j.contains("dropped_directions"))
            env.dropped_directions = j["dropped_directions"].get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("invalid envelope json: ") + e.what());
    }
    for (const Halfspace& hs : env.halfspaces)
        if (hs.n.size() != env.labels.size())
            throw Error("halfspace dimension does not match the labels");
    return env;
}

FlexibilityEnvelope load_envelope(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open envelope file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return envelope_from_json(ss.str());
}

void save_envelope(const FlexibilityEnvelope& env, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write envelope file: " + path);
    out << envelope_to_json(env);
}

}  // namespace gridflex
