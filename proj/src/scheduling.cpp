#include "gridflex/scheduling.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>

#include "gridflex/qp.hpp"

namespace gridflex {

namespace {

constexpr double kOuterTol = 1e-6;
constexpr int kOuterCap = 40;

void fleet_energy(const std::vector<StorageUnit>& fleet, double& e0, double& ef, double& cap,
                  double& p_cap) {
    e0 = ef = cap = p_cap = 0.0;
    for (const StorageUnit& s : fleet) {
        e0 += s.soc_init * s.e_cap;
        ef += s.soc_final * s.e_cap;
        cap += s.e_cap;
        p_cap += s.p_max;
    }
}

double step_cost(const ScheduleProblem& prob, double p) {
    return prob.alpha * p * p + prob.beta * p;
}

// affine expression of one original model column over the reduced free block
void column_terms(const ReducedModel& red, std::size_t col, Vector& w, double& c0) {
    const std::size_t nf = red.free_cols.size();
    w.assign(nf, 0.0);
    for (std::size_t f = 0; f < nf; ++f) w[f] = red.recon(col, f);
    c0 = red.recon_const[col];
}

struct StackedSolve {
    ScheduleResult result;
    std::vector<Vector> z_free;  // per-step reduced solution, for reconstruction
};

// Variables [P_1..P_T | E_1..E_T | z_f^1 | ... | z_f^T]: ties pin P_t to the
// model expression, energy rows integrate the aggregate charge, the final
// energy is pinned to the soc_final aggregate.
StackedSolve solve_stacked(const ScheduleProblem& prob, const std::vector<ReducedModel>& reds) {
    const std::size_t T = prob.horizon;
    const double dt = prob.profiles.dt_hours;
    double e0, ef, cap, p_cap;
    fleet_energy(prob.storage, e0, ef, cap, p_cap);

    StackedSolve out;
    for (const ReducedModel& red : reds) {
        if (!red.feasible) {
            out.result.status = ScheduleStatus::Infeasible;
            return out;
        }
    }

    std::vector<std::size_t> zoff(T);
    std::size_t nv = 2 * T;
    std::size_t mi = 0;
    for (std::size_t t = 0; t < T; ++t) {
        zoff[t] = nv;
        nv += reds[t].free_cols.size();
        mi += reds[t].in_a.rows();
    }

    QpProblem qp;
    qp.h = Matrix(nv, nv);
    qp.g.assign(nv, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        qp.h(t, t) = 2.0 * prob.alpha;
        qp.g[t] = prob.beta;
    }

    qp.eq_a = Matrix(2 * T, nv);
    qp.eq_b.assign(2 * T, 0.0);
    Vector w;
    double c0;
    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t nf = reds[t].free_cols.size();
        column_terms(reds[t], 0, w, c0);
        qp.eq_a(2 * t, t) = 1.0;
        for (std::size_t f = 0; f < nf; ++f) qp.eq_a(2 * t, zoff[t] + f) = -w[f];
        qp.eq_b[2 * t] = c0;

        column_terms(reds[t], 1, w, c0);
        qp.eq_a(2 * t + 1, T + t) = 1.0;
        if (t > 0) qp.eq_a(2 * t + 1, T + t - 1) = -1.0;
        for (std::size_t f = 0; f < nf; ++f) qp.eq_a(2 * t + 1, zoff[t] + f) = -dt * w[f];
        qp.eq_b[2 * t + 1] = dt * c0 + (t == 0 ? e0 : 0.0);
    }

    qp.in_a = Matrix(mi, nv);
    qp.in_b.assign(mi, 0.0);
    std::size_t row = 0;
    for (std::size_t t = 0; t < T; ++t) {
        const ReducedModel& red = reds[t];
        for (std::size_t r = 0; r < red.in_a.rows(); ++r, ++row) {
            for (std::size_t f = 0; f < red.free_cols.size(); ++f)
                qp.in_a(row, zoff[t] + f) = red.in_a(r, f);
            qp.in_b[row] = red.in_b[r];
        }
    }

    qp.lo.assign(nv, -kInf);
    qp.hi.assign(nv, kInf);
    for (std::size_t t = 0; t < T; ++t) {
        const bool last = t + 1 == T;
        qp.lo[T + t] = last ? ef : 0.0;
        qp.hi[T + t] = last ? ef : cap;
        for (std::size_t f = 0; f < reds[t].free_cols.size(); ++f) {
            qp.lo[zoff[t] + f] = reds[t].lo[f];
            qp.hi[zoff[t] + f] = reds[t].hi[f];
        }
    }

    const QpResult res = solve_qp(qp);
    if (res.status != QpStatus::Optimal) {
        out.result.status = ScheduleStatus::Infeasible;
        return out;
    }

    out.result.p_pcc.assign(res.z.begin(), res.z.begin() + static_cast<std::ptrdiff_t>(T));
    out.result.e_agg.assign(res.z.begin() + static_cast<std::ptrdiff_t>(T),
                            res.z.begin() + static_cast<std::ptrdiff_t>(2 * T));
    out.result.objective = res.value;
    out.result.kkt_residual = res.kkt_residual;
    out.result.iterations = res.iterations;
    out.z_free.resize(T);
    for (std::size_t t = 0; t < T; ++t)
        out.z_free[t].assign(res.z.begin() + static_cast<std::ptrdiff_t>(zoff[t]),
                             res.z.begin() + static_cast<std::ptrdiff_t>(
                                                 zoff[t] + reds[t].free_cols.size()));
    return out;
}

BusInjections injections_with_storage(const Network& net, const DayProfile& profiles,
                                      std::size_t t, const Vector& unit_row) {
    BusInjections inj = base_injections(net, profiles.load_pu[t], profiles.pv_pu[t]);
    for (std::size_t k = 0; k < net.storage.size(); ++k)
        inj.p[net.storage[k].bus] -= unit_row[k];
    return inj;
}

}  // namespace

ScheduleProblem make_schedule_problem(const Network& net, const DayProfile& profiles,
                                      std::size_t horizon, double alpha, double beta) {
    if (horizon == 0) throw Error("horizon must be positive");
    if (profiles.steps() < horizon) throw Error("profiles do not cover the horizon");
    ScheduleProblem prob;
    prob.horizon = horizon;
    prob.profiles = profiles;
    prob.alpha = alpha;
    prob.beta = beta;
    prob.storage = net.storage;
    if (alpha < 0.0) throw Error("quadratic cost coefficient must be nonnegative");
    return prob;
}

const char* to_string(ScheduleStatus s) {
    return s == ScheduleStatus::Optimal ? "optimal" : "infeasible";
}

Vector disaggregate_power(const std::vector<StorageUnit>& fleet, double aggregate) {
    Vector split(fleet.size(), 0.0);
    double p_cap = 0.0;
    for (const StorageUnit& s : fleet) p_cap += s.p_max;
    if (p_cap <= 0.0) return split;
    for (std::size_t k = 0; k < fleet.size(); ++k)
        split[k] = aggregate * fleet[k].p_max / p_cap;
    return split;
}

ScheduleResult schedule_over_envelope(const ScheduleProblem& prob,
                                      const FlexibilityEnvelope& env) {
    const std::size_t T = prob.horizon;
    if (env.dims() != 2 * T) throw Error("envelope does not match the horizon");
    if (env.halfspaces.empty()) throw Error("empty envelope");

    QpProblem qp;
    qp.h = Matrix(2 * T, 2 * T);
    qp.g.assign(2 * T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        qp.h(t, t) = 2.0 * prob.alpha;
        qp.g[t] = prob.beta;
    }
    qp.in_a = Matrix(env.halfspaces.size(), 2 * T);
    qp.in_b.assign(env.halfspaces.size(), 0.0);
    for (std::size_t r = 0; r < env.halfspaces.size(); ++r) {
        for (std::size_t k = 0; k < 2 * T; ++k) qp.in_a(r, k) = env.halfspaces[r].n[k];
        qp.in_b[r] = env.halfspaces[r].h;
    }
    qp.lo.assign(2 * T, -kInf);
    qp.hi.assign(2 * T, kInf);

    Vector warm;
    if (env.feasible_point.size() == 2 * T) warm = env.feasible_point;
    const QpResult res = solve_qp(qp, warm);

    ScheduleResult out;
    if (res.status != QpStatus::Optimal) {
        out.status = ScheduleStatus::Infeasible;
        return out;
    }
    out.p_pcc.assign(res.z.begin(), res.z.begin() + static_cast<std::ptrdiff_t>(T));
    out.e_agg.assign(res.z.begin() + static_cast<std::ptrdiff_t>(T), res.z.end());
    out.objective = res.value;
    out.kkt_residual = res.kkt_residual;
    out.iterations = res.iterations;

    const double dt = prob.profiles.dt_hours;
    out.unit_powers = Matrix(T, prob.storage.size());
    double prev = env.e_init;
    for (std::size_t t = 0; t < T; ++t) {
        const double charge = (out.e_agg[t] - prev) / dt;
        const Vector split = disaggregate_power(prob.storage, charge);
        for (std::size_t k = 0; k < split.size(); ++k) out.unit_powers(t, k) = split[k];
        prev = out.e_agg[t];
    }
    return out;
}

ScheduleResult schedule_full_linear(const ScheduleProblem& prob,
                                    const std::vector<LinearModel>& step_models) {
    const std::size_t T = prob.horizon;
    if (step_models.size() != T) throw Error("one step model per horizon step required");

    std::vector<ReducedModel> reds;
    reds.reserve(T);
    for (const LinearModel& model : step_models) {
        if (model.nx != 2) throw Error("step model must expose the (P_pcc, C_agg) coupling");
        reds.push_back(reduce_model(model));
    }

    StackedSolve solved = solve_stacked(prob, reds);
    if (solved.result.status != ScheduleStatus::Optimal) return solved.result;

    const std::size_t ns = prob.storage.size();
    solved.result.unit_powers = Matrix(T, ns);
    for (std::size_t t = 0; t < T; ++t) {
        const Vector full = reconstruct(reds[t], solved.z_free[t]);
        for (std::size_t k = 0; k < ns; ++k)
            solved.result.unit_powers(t, k) =
                full[step_models[t].col("sto[" + std::to_string(k) + "]")];
    }
    return solved.result;
}

namespace {

// Ties each unit to its p_max share of the aggregate, matching the
// disaggregation used everywhere else; the benchmark then survives the
// proportional replay of verification without drift.
LinearModel pin_proportional_split(const LinearModel& model,
                                   const std::vector<StorageUnit>& fleet) {
    if (fleet.size() <= 1) return model;
    double total = 0.0;
    for (const StorageUnit& s : fleet) total += s.p_max;
    const std::size_t nr = model.rows.rows();
    const std::size_t nc = model.rows.cols();
    LinearModel out = model;
    out.rows = Matrix(nr + fleet.size(), nc);
    out.c.resize(nr + fleet.size());
    for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t c = 0; c < nc; ++c) out.rows(r, c) = model.rows(r, c);
        out.c[r] = model.c[r];
    }
    for (std::size_t k = 0; k < fleet.size(); ++k) {
        out.rows(nr + k, model.col("sto[" + std::to_string(k) + "]")) = 1.0;
        out.rows(nr + k, 1) = -fleet[k].p_max / total;
        out.c[nr + k] = 0.0;
    }
    return out;
}

}  // namespace

ScheduleResult schedule_ac_benchmark(const ScheduleProblem& prob, const Network& net) {
    const std::size_t T = prob.horizon;
    const double dt = prob.profiles.dt_hours;
    if (net.storage.size() != prob.storage.size())
        throw Error("problem fleet does not match the network");
    double e0, ef, cap, p_cap;
    fleet_energy(prob.storage, e0, ef, cap, p_cap);

    const double ramp = static_cast<double>(T) * dt > 0.0
                            ? (ef - e0) / (static_cast<double>(T) * dt)
                            : 0.0;
    Matrix unit(T, net.storage.size());
    {
        const Vector split = disaggregate_power(prob.storage, ramp);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t k = 0; k < split.size(); ++k) unit(t, k) = split[k];
    }

    const auto solve_states = [&](const Matrix& powers) {
        std::vector<std::future<PowerFlowState>> jobs;
        jobs.reserve(T);
        for (std::size_t t = 0; t < T; ++t) {
            jobs.push_back(std::async(std::launch::async, [&, t]() {
                Vector row(net.storage.size());
                for (std::size_t k = 0; k < row.size(); ++k) row[k] = powers(t, k);
                return solve_ac(net, injections_with_storage(net, prob.profiles, t, row));
            }));
        }
        std::vector<PowerFlowState> states;
        states.reserve(T);
        for (std::size_t t = 0; t < T; ++t) {
            try {
                states.push_back(jobs[t].get());
            } catch (const Error& e) {
                throw Error("ac solve failed at step " + std::to_string(t) + ": " + e.what());
            }
        }
        return states;
    };

    Vector prev_p;
    StackedSolve solved;
    std::vector<ReducedModel> reds(T);
    std::vector<LinearModel> models;
    double gap = kInf;
    int outer = 0;
    bool converged = false;
    while (outer < kOuterCap) {
        ++outer;
        const std::vector<PowerFlowState> states = solve_states(unit);
        models.clear();
        models.reserve(T);
        for (std::size_t t = 0; t < T; ++t) {
            const BusInjections fixed =
                base_injections(net, prob.profiles.load_pu[t], prob.profiles.pv_pu[t]);
            models.push_back(pin_proportional_split(build_lin_ac(net, states[t], fixed),
                                                    net.storage));
        }
        for (std::size_t t = 0; t < T; ++t) reds[t] = reduce_model(models[t]);
        solved = solve_stacked(prob, reds);
        if (solved.result.status != ScheduleStatus::Optimal) return solved.result;

        // damped update of the linearization trajectory; full steps early,
        // half steps once the loss feedback could start to oscillate
        const double relax = outer <= 2 ? 1.0 : 0.5;
        for (std::size_t t = 0; t < T; ++t) {
            const Vector full = reconstruct(reds[t], solved.z_free[t]);
            for (std::size_t k = 0; k < net.storage.size(); ++k) {
                const double next = full[models[t].col("sto[" + std::to_string(k) + "]")];
                unit(t, k) = relax * next + (1.0 - relax) * unit(t, k);
            }
        }
        if (!prev_p.empty()) {
            gap = 0.0;
            for (std::size_t t = 0; t < T; ++t)
                gap = std::max(gap, std::abs(solved.result.p_pcc[t] - prev_p[t]));
            if (gap < kOuterTol) {
                converged = true;
            }
        }
        prev_p = solved.result.p_pcc;
        if (converged) break;
    }
    if (!converged) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3e", gap);
        throw Error(std::string("ac benchmark did not settle; last PCC gap ") + buf);
    }

    // the reported trajectory comes from exact AC solves at the final dispatch
    const std::vector<PowerFlowState> states = solve_states(unit);
    ScheduleResult out;
    out.p_pcc.resize(T);
    out.e_agg.resize(T);
    out.unit_powers = unit;
    double energy = e0;
    for (std::size_t t = 0; t < T; ++t) {
        out.p_pcc[t] = states[t].p[net.slack()];
        double charge = 0.0;
        for (std::size_t k = 0; k < net.storage.size(); ++k) charge += unit(t, k);
        energy += dt * charge;
        out.e_agg[t] = energy;
        out.objective += step_cost(prob, out.p_pcc[t]);
    }
    out.kkt_residual = solved.result.kkt_residual;
    out.iterations = outer;
    return out;
}

std::string schedule_to_csv(const ScheduleProblem& prob, const ScheduleResult& res) {
    std::string csv = "hour,p_pcc,e_agg,objective_contrib\n";
    char line[160];
    for (std::size_t t = 0; t < res.p_pcc.size(); ++t) {
        std::snprintf(line, sizeof(line), "%zu,%.12f,%.12f,%.12f\n", t, res.p_pcc[t],
                      res.e_agg[t], step_cost(prob, res.p_pcc[t]));
        csv += line;
    }
    return csv;
}

std::string schedule_summary_json(const ScheduleProblem& prob, const ScheduleResult& res) {
    nlohmann::json j;
    j["status"] = to_string(res.status);
    j["horizon"] = res.p_pcc.size();
    j["dt_hours"] = prob.profiles.dt_hours;
    j["alpha"] = prob.alpha;
    j["beta"] = prob.beta;
    j["objective"] = res.objective;
    j["kkt_residual"] = res.kkt_residual;
    j["iterations"] = res.iterations;
    j["p_pcc"] = res.p_pcc;
    j["e_agg"] = res.e_agg;
    return j.dump(2) + "\n";
}

ScheduleResult schedule_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error("empty schedule csv");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "hour,p_pcc,e_agg,objective_contrib")
        throw Error("unexpected schedule csv header: " + line);
    ScheduleResult res;
    std::size_t expect = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t hour;
        double p, e, c;
        if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf", &hour, &p, &e, &c) != 4)
            throw Error("bad schedule csv row: " + line);
        if (hour != expect) throw Error("schedule csv hours must run 0,1,2,...");
        ++expect;
        res.p_pcc.push_back(p);
        res.e_agg.push_back(e);
        res.objective += c;
    }
    if (res.p_pcc.empty()) throw Error("schedule csv has no rows");
    return res;
}

}  // namespace gridflex
