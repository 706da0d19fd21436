#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gridflex/acpf.hpp"
#include "gridflex/linalg.hpp"
#include "gridflex/network.hpp"
#include "gridflex/profiles.hpp"

namespace gridflex {

enum class ModelKind { LinDistFlow, Dc, DcEnhanced, LinAc };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// One scheduling step in standard form: rows * z = c over columns
// z = [x (coupling) | y (local)], box bounds per column. The coupling block
// is always [P_pcc, C_agg] with C_agg the aggregate storage charging power.
struct LinearModel {
    ModelKind kind = ModelKind::LinDistFlow;
    Matrix rows;  // n_rows x (nx + ny)
    Vector c;
    std::size_t nx = 0;
    Vector lo, hi;
    std::vector<std::string> col_names;            // column -> name
    std::map<std::string, std::size_t> var_index;  // name -> column

    // modeled active/reactive branch loss as affine expressions over columns;
    // empty terms with zero constant for the lossless kinds
    std::vector<std::vector<std::pair<std::size_t, double>>> loss_terms;
    Vector loss_const;
    std::vector<std::vector<std::pair<std::size_t, double>>> qloss_terms;
    Vector qloss_const;

    std::size_t cols() const { return col_names.size(); }
    std::size_t col(const std::string& name) const;
};

struct LossReport {
    Vector p_loss;  // per branch
    Vector q_loss;
    std::vector<bool> negative_flags;  // p_loss < -1e-9

    bool any_negative() const;
};

// Angle dependence of the linearized loss term: the quadratic reading of the
// loss expression is the default; the printed linear-in-angle variant is kept
// for comparison.
enum class EnhancedLossAngle { Quadratic, Printed };

LinearModel build_lindistflow(const Network& net, const BusInjections& fixed);

LinearModel build_dc(const Network& net, const BusInjections& fixed);

struct EnhancedDcModel {
    LinearModel model;
    LossReport base_losses;
};

EnhancedDcModel build_enhanced_dc(const Network& net, const PowerFlowState& base,
                                  const BusInjections& fixed,
                                  EnhancedLossAngle angle = EnhancedLossAngle::Quadratic);

LinearModel build_lin_ac(const Network& net, const PowerFlowState& base,
                         const BusInjections& fixed);

// Evaluates the modeled per-branch losses at a point satisfying the model
// equalities and flags negative entries.
LossReport detect_negative_losses(const LinearModel& model, const Vector& point);

std::string model_to_json(const LinearModel& model);

// Builds the per-step model of the requested kind; base may be null for the
// lossless kinds and must be a converged state for the base-point kinds.
LinearModel build_step_model(ModelKind kind, const Network& net, const BusInjections& fixed,
                             const PowerFlowState* base);

// Paper feature row (topology, voltage, angle, reactive power, loss handling).
std::vector<std::string> model_feature_row(ModelKind kind);

}  // namespace gridflex
