#pragma once

#include <string>
#include <vector>

#include "gridflex/aggregation.hpp"
#include "gridflex/linalg.hpp"
#include "gridflex/linear_model.hpp"
#include "gridflex/network.hpp"
#include "gridflex/profiles.hpp"

namespace gridflex {

// Day-ahead dispatch instance: quadratic PCC cost over the horizon with the
// storage fleet as the flexible asset. Cost per step is alpha P_pcc^2 + beta P_pcc.
struct ScheduleProblem {
    std::size_t horizon = 24;
    DayProfile profiles;
    double alpha = 1.0;
    double beta = 0.0;
    std::vector<StorageUnit> storage;
};

ScheduleProblem make_schedule_problem(const Network& net, const DayProfile& profiles,
                                      std::size_t horizon, double alpha = 1.0, double beta = 0.0);

enum class ScheduleStatus { Optimal, Infeasible };
const char* to_string(ScheduleStatus s);

struct ScheduleResult {
    ScheduleStatus status = ScheduleStatus::Optimal;
    Vector p_pcc;        // PCC import per step
    Vector e_agg;        // aggregate stored energy at the end of each step (p.u. h)
    Matrix unit_powers;  // horizon x fleet size charging powers; empty when unavailable
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
};

// QP over the envelope halfspaces in (P_pcc[1..T], E_agg[1..T]).
ScheduleResult schedule_over_envelope(const ScheduleProblem& prob,
                                      const FlexibilityEnvelope& env);

// QP over the stacked per-step models joined by storage energy dynamics; one
// model per step because the balance constants track the profiles.
ScheduleResult schedule_full_linear(const ScheduleProblem& prob,
                                    const std::vector<LinearModel>& step_models);

// Sequential linearization against the exact AC equations: linearize at the
// current trajectory, re-optimize, repeat until the PCC trajectory settles.
// The returned trajectory comes from per-step AC solves at the final dispatch.
ScheduleResult schedule_ac_benchmark(const ScheduleProblem& prob, const Network& net);

// Splits an aggregate charging power across the fleet proportionally to p_max.
Vector disaggregate_power(const std::vector<StorageUnit>& fleet, double aggregate);

std::string schedule_to_csv(const ScheduleProblem& prob, const ScheduleResult& res);
std::string schedule_summary_json(const ScheduleProblem& prob, const ScheduleResult& res);
ScheduleResult schedule_from_csv(const std::string& text);

}  // namespace gridflex
