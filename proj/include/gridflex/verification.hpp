#pragma once

#include <string>
#include <vector>

#include "gridflex/linalg.hpp"
#include "gridflex/network.hpp"
#include "gridflex/profiles.hpp"
#include "gridflex/scheduling.hpp"

namespace gridflex {

enum class ViolationKind { SocBelowZero, SocAboveOne, FinalSocMiss, Voltage, Flow };
const char* to_string(ViolationKind kind);

struct Violation {
    std::size_t step = 0;
    ViolationKind kind = ViolationKind::SocBelowZero;
    double magnitude = 0.0;
};

// Outcome of replaying a schedule against the exact AC equations with the
// storage fleet balancing each step. SOC rows are fractions; row 0 holds the
// initial state so there are horizon + 1 rows.
struct VerificationReport {
    Vector p_pcc;             // applied PCC import per step
    Vector realized_losses;   // exact AC losses per step (p.u.)
    Vector model_losses;      // losses implied by the schedule's balance
    Vector loss_error;        // realized - model
    Vector cumulative_loss_error;  // running sum times dt (p.u. h)
    Matrix soc_units;         // (horizon + 1) x fleet
    Vector soc_agg;           // horizon + 1
    std::vector<Violation> violations;  // sorted by step
    double final_soc_target = 0.5;      // aggregate fraction
    double dt_hours = 1.0;
};

// Fixes P_pcc and the profiles per step, root-finds the aggregate storage
// power that balances the AC network, disaggregates proportionally and
// integrates SOC. Violations are recorded, never clipped.
VerificationReport verify_schedule(const Network& net, const ScheduleResult& schedule,
                                   const DayProfile& profiles);

struct LossErrorSeries {
    Vector per_step;
    Vector cumulative;  // p.u. h
};

LossErrorSeries loss_error_series(const VerificationReport& report);

std::string verification_to_csv(const VerificationReport& report);
std::string violations_to_json(const VerificationReport& report);

// One campaign row for the comparison matrix.
struct CampaignOutcome {
    std::string model;  // lindistflow | dc | dc_enhanced | lin_ac | ac
    VerificationReport report;
    double objective = 0.0;
    int negative_losses = -1;  // -1 not applicable, 0 absent, 1 present
};

// Feature and outcome matrix across model campaigns as CSV text.
std::string comparison_report(const std::vector<CampaignOutcome>& outcomes);

}  // namespace gridflex
