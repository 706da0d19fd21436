#include "gridflex/verification.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>

#include "gridflex/acpf.hpp"

namespace gridflex {

namespace {

constexpr double kPccTol = 1e-8;
constexpr double kFinalSocTol = 1e-3;  // 0.1 percentage points as a fraction
constexpr double kLimitTol = 1e-9;
constexpr int kRootEvalCap = 80;

struct StepBalance {
    double charge = 0.0;
    PowerFlowState state;
};

// Finds the aggregate storage power whose AC solution returns the scheduled
// PCC import: bracketed regula falsi with the Illinois cut, monotone because
// charging more always imports more.
StepBalance balance_step(const Network& net, const DayProfile& profiles, std::size_t t,
                         double target, double load_total, double pv_total) {
    PowerFlowState last;
    const auto mismatch = [&](double charge) {
        BusInjections inj = base_injections(net, profiles.load_pu[t], profiles.pv_pu[t]);
        const Vector split = disaggregate_power(net.storage, charge);
        for (std::size_t k = 0; k < net.storage.size(); ++k)
            inj.p[net.storage[k].bus] -= split[k];
        try {
            last = solve_ac(net, inj);
        } catch (const Error& e) {
            throw Error("ac verification failed at step " + std::to_string(t) + ": " + e.what());
        }
        return last.p[net.slack()] - target;
    };

    if (net.storage.empty()) {
        const double f = mismatch(0.0);
        if (std::abs(f) > 1e-6)
            throw Error("no storage to balance step " + std::to_string(t) +
                        "; PCC mismatch " + std::to_string(f));
        return {0.0, last};
    }

    // Bracket around the lossless balance guess. The root differs from the
    // guess only by the step's losses, so open with a span on the scale of
    // the operating point; a wide first probe can dump several p.u. onto the
    // storage buses and collapse the AC solve on weaker feeders.
    const double guess = target + pv_total - load_total;
    double span = 0.05 * (1.0 + std::abs(guess) + load_total + pv_total);
    double a = guess - span, b = guess + span;
    double fa = mismatch(a);
    int grow = 0;
    while (fa > 0.0) {
        if (++grow > 8) throw Error("bracketing failed at step " + std::to_string(t));
        span *= 2.0;
        a = guess - span;
        fa = mismatch(a);
    }
    if (std::abs(fa) <= kPccTol) return {a, last};
    double fb = mismatch(b);
    grow = 0;
    while (fb < 0.0) {
        if (++grow > 8) throw Error("bracketing failed at step " + std::to_string(t));
        span *= 2.0;
        b = guess + span;
        fb = mismatch(b);
    }
    if (std::abs(fb) <= kPccTol) return {b, last};

    int side = 0;
    for (int it = 0; it < kRootEvalCap; ++it) {
        double c = b - fb * (b - a) / (fb - fa);
        if (!(c > a && c < b)) c = 0.5 * (a + b);
        const double fc = mismatch(c);
        if (std::abs(fc) <= kPccTol || b - a < 1e-14 * (1.0 + std::abs(c)))
            return {c, last};
        if (fc < 0.0) {
            a = c;
            fa = fc;
            if (side == -1) fb *= 0.5;
            side = -1;
        } else {
            b = c;
            fb = fc;
            if (side == 1) fa *= 0.5;
            side = 1;
        }
    }
    throw Error("pcc balance root-find did not converge at step " + std::to_string(t));
}

}  // namespace

const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::SocBelowZero: return "soc_below_zero";
        case ViolationKind::SocAboveOne: return "soc_above_one";
        case ViolationKind::FinalSocMiss: return "final_soc_miss";
        case ViolationKind::Voltage: return "voltage";
        case ViolationKind::Flow: return "flow";
    }
    return "unknown";
}

VerificationReport verify_schedule(const Network& net, const ScheduleResult& schedule,
                                   const DayProfile& profiles) {
    const std::size_t T = schedule.p_pcc.size();
    if (T == 0) throw Error("schedule has no steps");
    if (schedule.e_agg.size() != T) throw Error("schedule lacks the energy series");
    if (profiles.steps() < T) throw Error("profiles do not cover the schedule");
    const double dt = profiles.dt_hours;
    const std::size_t ns = net.storage.size();

    double e0 = 0.0, ef = 0.0, cap = 0.0;
    for (const StorageUnit& s : net.storage) {
        e0 += s.soc_init * s.e_cap;
        ef += s.soc_final * s.e_cap;
        cap += s.e_cap;
    }

    VerificationReport rep;
    rep.dt_hours = dt;
    rep.final_soc_target = cap > 0.0 ? ef / cap : 0.0;
    rep.p_pcc = schedule.p_pcc;
    rep.realized_losses.resize(T);
    rep.model_losses.resize(T);
    rep.soc_units = Matrix(T + 1, ns);
    rep.soc_agg.resize(T + 1);
    for (std::size_t k = 0; k < ns; ++k) rep.soc_units(0, k) = net.storage[k].soc_init;
    rep.soc_agg[0] = cap > 0.0 ? e0 / cap : 0.0;

    double e_sched_prev = e0;
    for (std::size_t t = 0; t < T; ++t) {
        double load_total = 0.0, pv_total = 0.0;
        for (const Bus& bus : net.buses) load_total += profiles.load_pu[t] * bus.p_load;
        for (const PvUnit& pv : net.pv) pv_total += profiles.pv_pu[t] * pv.p_max;

        const StepBalance bal = balance_step(net, profiles, t, schedule.p_pcc[t], load_total,
                                             pv_total);
        rep.realized_losses[t] = total_losses(bal.state, net);
        const double c_sched = (schedule.e_agg[t] - e_sched_prev) / dt;
        e_sched_prev = schedule.e_agg[t];
        rep.model_losses[t] = schedule.p_pcc[t] + pv_total - load_total - c_sched;

        const Vector split = disaggregate_power(net.storage, bal.charge);
        double energy = 0.0;
        for (std::size_t k = 0; k < ns; ++k) {
            const double soc =
                rep.soc_units(t, k) + dt * split[k] / net.storage[k].e_cap;
            rep.soc_units(t + 1, k) = soc;
            energy += soc * net.storage[k].e_cap;
        }
        rep.soc_agg[t + 1] = cap > 0.0 ? energy / cap : 0.0;

        if (rep.soc_agg[t + 1] < -1e-12)
            rep.violations.push_back({t, ViolationKind::SocBelowZero, -rep.soc_agg[t + 1]});
        if (rep.soc_agg[t + 1] > 1.0 + 1e-12)
            rep.violations.push_back({t, ViolationKind::SocAboveOne, rep.soc_agg[t + 1] - 1.0});

        double v_excess = 0.0;
        for (std::size_t i = 0; i < net.size(); ++i) {
            v_excess = std::max(v_excess, net.buses[i].v_min - bal.state.v[i]);
            v_excess = std::max(v_excess, bal.state.v[i] - net.buses[i].v_max);
        }
        if (v_excess > kLimitTol)
            rep.violations.push_back({t, ViolationKind::Voltage, v_excess});

        double f_excess = 0.0;
        for (std::size_t l = 0; l < net.branches.size(); ++l) {
            if (!std::isfinite(net.branches[l].flow_limit)) continue;
            f_excess = std::max(f_excess,
                                std::abs(bal.state.branch_p[l]) - net.branches[l].flow_limit);
        }
        if (f_excess > kLimitTol) rep.violations.push_back({t, ViolationKind::Flow, f_excess});
    }

    const LossErrorSeries series = loss_error_series(rep);
    rep.loss_error = series.per_step;
    rep.cumulative_loss_error = series.cumulative;

    if (cap > 0.0 && std::abs(rep.soc_agg[T] - rep.final_soc_target) > kFinalSocTol)
        rep.violations.push_back({T - 1, ViolationKind::FinalSocMiss,
                                  std::abs(rep.soc_agg[T] - rep.final_soc_target)});
    return rep;
}

LossErrorSeries loss_error_series(const VerificationReport& report) {
    LossErrorSeries s;
    const std::size_t T = report.realized_losses.size();
    s.per_step.resize(T);
    s.cumulative.resize(T);
    double run = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        s.per_step[t] = report.realized_losses[t] - report.model_losses[t];
        run += s.per_step[t] * report.dt_hours;
        s.cumulative[t] = run;
    }
    return s;
}

std::string verification_to_csv(const VerificationReport& report) {
    const std::size_t T = report.p_pcc.size();
    const std::size_t ns = report.soc_units.cols();
    std::string csv = "hour,p_pcc,soc_agg";
    for (std::size_t k = 0; k < ns; ++k) csv += ",soc_unit_" + std::to_string(k);
    csv += ",loss_realized,loss_model,loss_error,cum_loss_error\n";
    char buf[96];
    for (std::size_t t = 0; t < T; ++t) {
        std::snprintf(buf, sizeof(buf), "%zu,%.12f,%.9f", t, report.p_pcc[t],
                      report.soc_agg[t + 1]);
        csv += buf;
        for (std::size_t k = 0; k < ns; ++k) {
            std::snprintf(buf, sizeof(buf), ",%.9f", report.soc_units(t + 1, k));
            csv += buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.9f,%.9f,%.9f,%.9f\n", report.realized_losses[t],
                      report.model_losses[t], report.loss_error[t],
                      report.cumulative_loss_error[t]);
        csv += buf;
    }
    return csv;
}

std::string violations_to_json(const VerificationReport& report) {
    nlohmann::json j;
    nlohmann::json list = nlohmann::json::array();
    for (const Violation& v : report.violations)
        list.push_back({{"step", v.step}, {"kind", to_string(v.kind)}, {"magnitude", v.magnitude}});
    j["violations"] = std::move(list);
    j["final_soc_agg"] = report.soc_agg.empty() ? 0.0 : report.soc_agg.back();
    j["final_soc_target"] = report.final_soc_target;
    j["cumulative_loss_error"] =
        report.cumulative_loss_error.empty() ? 0.0 : report.cumulative_loss_error.back();
    return j.dump(2) + "\n";
}

std::string comparison_report(const std::vector<CampaignOutcome>& outcomes) {
    if (outcomes.size() < 2) throw Error("need >= 2 campaigns for a comparison report");
    std::string csv =
        "model,topology,voltage_magnitude,voltage_angle,reactive_power,line_loss,"
        "negative_losses,final_soc_agg,final_soc_miss,cumulative_loss_error,objective\n";
    char buf[128];
    for (const CampaignOutcome& oc : outcomes) {
        std::vector<std::string> features;
        if (oc.model == "ac") {
            features = {"meshed", "standard", "standard", "standard", "exact"};
        } else {
            features = model_feature_row(model_kind_from_string(oc.model));
        }
        csv += oc.model;
        for (const std::string& f : features) csv += "," + f;
        if (oc.negative_losses < 0)
            csv += oc.model == "ac" ? ",not applicable (exact)" : ",not applicable (lossless)";
        else
            csv += oc.negative_losses > 0 ? ",true" : ",false";
        const double soc_end = oc.report.soc_agg.empty() ? 0.0 : oc.report.soc_agg.back();
        const double cum = oc.report.cumulative_loss_error.empty()
                               ? 0.0
                               : oc.report.cumulative_loss_error.back();
        std::snprintf(buf, sizeof(buf), ",%.9f,%.9f,%.9f,%.9f\n", soc_end,
                      soc_end - oc.report.final_soc_target, cum, oc.objective);
        csv += buf;
    }
    return csv;
}

}  // namespace gridflex
