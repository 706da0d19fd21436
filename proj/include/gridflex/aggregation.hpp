#pragma once

#include <string>
#include <vector>

#include "gridflex/acpf.hpp"
#include "gridflex/linalg.hpp"
#include "gridflex/linear_model.hpp"
#include "gridflex/network.hpp"
#include "gridflex/profiles.hpp"

namespace gridflex {

// Names the coupling dimensions an envelope lives in: for one scheduling step
// that is (P_pcc, C_agg), for a horizon it is P_pcc[1..T] then E_agg[1..T].
struct CouplingSpace {
    std::vector<std::string> labels;
    double dt_hours = 1.0;

    std::size_t dims() const { return labels.size(); }
};

CouplingSpace step_coupling_space(const LinearModel& model, double dt_hours = 1.0);
CouplingSpace schedule_coupling_space(std::size_t horizon, double dt_hours);

enum class EnvelopeKind { Outer, Exact };
const char* to_string(EnvelopeKind kind);

// n . x <= h
struct Halfspace {
    Vector n;
    double h = 0.0;
};

struct FlexibilityEnvelope {
    EnvelopeKind kind = EnvelopeKind::Outer;
    std::vector<Halfspace> halfspaces;
    std::vector<std::string> labels;
    std::string provenance;
    double dt_hours = 1.0;
    double e_init = 0.0;  // aggregate stored energy entering step 1
    Vector feasible_point;  // best-effort interior hint in coupling coordinates
    std::size_t dropped_directions = 0;  // unbounded support directions dropped

    std::size_t dims() const { return labels.size(); }
};

bool envelope_contains(const FlexibilityEnvelope& env, const Vector& x, double slack = 1e-7);

// Equality-eliminated form of a LinearModel: every column is affine in the
// remaining free columns, box bounds of eliminated columns become pruned
// inequality rows in_a z <= in_b over the free ones.
struct ReducedModel {
    bool feasible = true;
    std::vector<std::size_t> free_cols;  // original column index per free variable
    Matrix recon;                        // original cols x free count
    Vector recon_const;
    Matrix in_a;
    Vector in_b;
    Vector lo, hi;  // boxes on the free variables
};

ReducedModel reduce_model(const LinearModel& model);
Vector reconstruct(const ReducedModel& red, const Vector& z_free);

// Full-variable feasible point with the coupling block pinned as closely as
// possible to the target (L1 deviation LP over the reduced set).
Vector nearest_model_point(const LinearModel& model, const Vector& coupling_target);

// count unit vectors evenly spaced on the 2-D circle, starting at +e1
std::vector<Vector> evenly_spaced_directions(std::size_t count);

// Outer approximation: one support LP per direction over the model's
// feasible set, restricted to the coupling block.
FlexibilityEnvelope project_support(const LinearModel& model, const CouplingSpace& space,
                                    const std::vector<Vector>& directions);

// Exact projection for small instances via variable elimination plus an LP
// redundancy sweep; guards against blowup with a column cap.
FlexibilityEnvelope project_fourier_motzkin(const LinearModel& model, const CouplingSpace& space,
                                            std::size_t variable_cap = 30);

// Power-energy envelope over the horizon: per-step support projection in
// (P_pcc, C_agg), charging mapped onto stored energy, capacity bounds and the
// final-energy pin appended.
FlexibilityEnvelope build_envelope(const Network& net, ModelKind kind,
                                   const PowerFlowState* base, const DayProfile& profiles,
                                   std::size_t horizon, std::size_t directions = 64);

std::string envelope_to_json(const FlexibilityEnvelope& env);
FlexibilityEnvelope envelope_from_json(const std::string& text);
FlexibilityEnvelope load_envelope(const std::string& path);
void save_envelope(const FlexibilityEnvelope& env, const std::string& path);

}  // namespace gridflex
