#include "gridflex/linear_model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace gridflex {

namespace {

constexpr std::size_t kNoCol = static_cast<std::size_t>(-1);
constexpr double kNegativeLossTol = 1e-9;

// Columns must all be registered before rows are laid down so every row has
// the final width.
struct ModelBuilder {
    explicit ModelBuilder(ModelKind kind) { model.kind = kind; }

    std::size_t add_col(std::string name, double lo, double hi) {
        const std::size_t idx = model.col_names.size();
        model.var_index.emplace(name, idx);
        model.col_names.push_back(std::move(name));
        model.lo.push_back(lo);
        model.hi.push_back(hi);
        return idx;
    }

    Vector blank() const { return Vector(model.col_names.size(), 0.0); }

    void add_row(const Vector& row, double rhs) {
        rows_.push_back(row);
        rhs_.push_back(rhs);
    }

    LinearModel take() {
        model.rows = Matrix(rows_.size(), model.col_names.size());
        for (std::size_t i = 0; i < rows_.size(); ++i)
            for (std::size_t j = 0; j < model.col_names.size(); ++j) model.rows(i, j) = rows_[i][j];
        model.c = std::move(rhs_);
        return std::move(model);
    }

    LinearModel model;

  private:
    std::vector<Vector> rows_;
    Vector rhs_;
};

std::string bus_var(const char* prefix, const Network& net, std::size_t bus) {
    return std::string(prefix) + "[" + std::to_string(net.id_of(bus)) + "]";
}

std::string branch_var(const char* prefix, const Network& net, std::size_t from, std::size_t to) {
    return std::string(prefix) + "[" + std::to_string(net.id_of(from)) + "->" +
           std::to_string(net.id_of(to)) + "]";
}

std::string sto_var(std::size_t k) { return "sto[" + std::to_string(k) + "]"; }

void require_injections(const Network& net, const BusInjections& fixed) {
    if (fixed.p.size() != net.size() || fixed.q.size() != net.size())
        throw Error("injection vectors do not match the bus count");
}

void require_base(const Network& net, const PowerFlowState& base) {
    if (base.v.size() != net.size() || base.theta.size() != net.size())
        throw Error("base state does not match the bus count");
    if (base.branch_p.size() != net.branches.size() ||
        base.branch_q.size() != net.branches.size() || base.ell.size() != net.branches.size())
        throw Error("base state is missing branch flows");
}

// Coupling block shared by every kind: the PCC import and the aggregate
// storage charging power, tied to the unit variables later.
void add_coupling_cols(ModelBuilder& b, const Network& net) {
    const double cap = net.storage_power_capacity();
    b.add_col("P_pcc", -kInf, kInf);
    b.add_col("C_agg", -cap, cap);
    b.model.nx = 2;
}

void add_storage_cols(ModelBuilder& b, const Network& net) {
    for (std::size_t k = 0; k < net.storage.size(); ++k)
        b.add_col(sto_var(k), -net.storage[k].p_max, net.storage[k].p_max);
}

void add_coupling_tie(ModelBuilder& b, const Network& net) {
    Vector row = b.blank();
    row[b.model.col("C_agg")] = 1.0;
    for (std::size_t k = 0; k < net.storage.size(); ++k) row[b.model.col(sto_var(k))] -= 1.0;
    b.add_row(row, 0.0);
}

// Storage charge consumes power at its bus; the slack balance absorbs the
// PCC import. Row reads: sum of bus-leaving flows + sto - [slack] P_pcc = fixed.
void add_device_terms(ModelBuilder& b, const Network& net, std::size_t i, Vector& prow,
                      Vector& qrow, bool with_q_pcc) {
    for (std::size_t k = 0; k < net.storage.size(); ++k)
        if (net.storage[k].bus == i) prow[b.model.col(sto_var(k))] += 1.0;
    if (i == net.slack()) {
        prow[b.model.col("P_pcc")] -= 1.0;
        if (with_q_pcc) qrow[b.model.col("Q_pcc")] -= 1.0;
    }
}

// Adds coeff * var when the column exists; slack-held quantities fold their
// base value into the right-hand side instead.
void put(Vector& row, double& rhs, std::size_t col, double coeff, double base_value) {
    if (col == kNoCol)
        rhs -= coeff * base_value;
    else
        row[col] += coeff;
}

void fill_zero_losses(LinearModel& m, std::size_t nb) {
    m.loss_terms.assign(nb, {});
    m.loss_const.assign(nb, 0.0);
    m.qloss_terms.assign(nb, {});
    m.qloss_const.assign(nb, 0.0);
}

// First-order data for a directed branch flow per the polar flow equations,
// taken at (vi, vj, tij) with tij the sending-minus-receiving angle.
struct FlowLin {
    double value = 0.0;
    double dvi = 0.0, dvj = 0.0, dtij = 0.0;
};

FlowLin p_flow_lin(double g, double b, double vi, double vj, double tij) {
    const double c = std::cos(tij), s = std::sin(tij);
    FlowLin f;
    f.value = g * vi * vi - vi * vj * (g * c + b * s);
    f.dvi = 2.0 * g * vi - vj * (g * c + b * s);
    f.dvj = -vi * (g * c + b * s);
    f.dtij = vi * vj * (g * s - b * c);
    return f;
}

FlowLin q_flow_lin(double g, double b, double vi, double vj, double tij) {
    const double c = std::cos(tij), s = std::sin(tij);
    FlowLin f;
    f.value = -b * vi * vi - vi * vj * (g * s - b * c);
    f.dvi = -2.0 * b * vi - vj * (g * s - b * c);
    f.dvj = -vi * (g * s - b * c);
    f.dtij = -vi * vj * (g * c + b * s);
    return f;
}

}  // namespace

std::size_t LinearModel::col(const std::string& name) const {
    const auto it = var_index.find(name);
    if (it == var_index.end()) throw Error("unknown model column: " + name);
    return it->second;
}

bool LossReport::any_negative() const {
    return std::any_of(negative_flags.begin(), negative_flags.end(), [](bool f) { return f; });
}

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::LinDistFlow: return "lindistflow";
        case ModelKind::Dc: return "dc";
        case ModelKind::DcEnhanced: return "dc_enhanced";
        case ModelKind::LinAc: return "lin_ac";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
    std::string s;
    for (char ch : name) s.push_back(ch == '-' ? '_' : static_cast<char>(std::tolower(ch)));
    if (s == "lindistflow") return ModelKind::LinDistFlow;
    if (s == "dc") return ModelKind::Dc;
    if (s == "dc_enhanced") return ModelKind::DcEnhanced;
    if (s == "lin_ac") return ModelKind::LinAc;
    throw Error("unknown model kind: " + name);
}

LinearModel build_lindistflow(const Network& net, const BusInjections& fixed) {
    require_injections(net, fixed);
    if (!check_radial(net)) throw Error("lindistflow requires a radial network");

    ModelBuilder b(ModelKind::LinDistFlow);
    const std::size_t n = net.size();
    const std::size_t slack = net.slack();

    add_coupling_cols(b, net);
    b.add_col("Q_pcc", -kInf, kInf);
    std::vector<std::size_t> u_col(n, kNoCol);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == slack) continue;
        u_col[i] = b.add_col(bus_var("u", net, i), net.buses[i].v_min * net.buses[i].v_min,
                             net.buses[i].v_max * net.buses[i].v_max);
    }
    std::vector<std::size_t> p_col, q_col;
    for (const Branch& br : net.branches) {
        p_col.push_back(b.add_col(branch_var("P", net, br.from, br.to), -br.flow_limit,
                                  br.flow_limit));
        q_col.push_back(b.add_col(branch_var("Q", net, br.from, br.to), -kInf, kInf));
    }
    add_storage_cols(b, net);

    for (std::size_t i = 0; i < n; ++i) {
        Vector prow = b.blank(), qrow = b.blank();
        for (std::size_t l = 0; l < net.branches.size(); ++l) {
            const Branch& br = net.branches[l];
            if (br.from != i && br.to != i) continue;
            const double sgn = br.from == i ? 1.0 : -1.0;
            prow[p_col[l]] += sgn;
            qrow[q_col[l]] += sgn;
        }
        add_device_terms(b, net, i, prow, qrow, true);
        b.add_row(prow, fixed.p[i]);
        b.add_row(qrow, fixed.q[i]);
    }

    // squared-voltage drop along each branch; the slack magnitude is held at 1
    for (std::size_t l = 0; l < net.branches.size(); ++l) {
        const Branch& br = net.branches[l];
        Vector row = b.blank();
        double rhs = 0.0;
        put(row, rhs, u_col[br.to], 1.0, 1.0);
        put(row, rhs, u_col[br.from], -1.0, 1.0);
        row[p_col[l]] = 2.0 * br.r;
        row[q_col[l]] = 2.0 * br.x;
        b.add_row(row, rhs);
    }

    add_coupling_tie(b, net);
    fill_zero_losses(b.model, net.branches.size());
    return b.take();
}

LinearModel build_dc(const Network& net, const BusInjections& fixed) {
    require_injections(net, fixed);

    ModelBuilder b(ModelKind::Dc);
    const std::size_t n = net.size();
    const std::size_t slack = net.slack();

    add_coupling_cols(b, net);
    std::vector<std::size_t> t_col(n, kNoCol);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == slack) continue;
        t_col[i] = b.add_col(bus_var("theta", net, i), -kInf, kInf);
    }
    std::vector<std::size_t> p_col;
    for (const Branch& br : net.branches)
        p_col.push_back(b.add_col(branch_var("P", net, br.from, br.to), -br.flow_limit,
                                  br.flow_limit));
    add_storage_cols(b, net);

    for (std::size_t i = 0; i < n; ++i) {
        Vector prow = b.blank(), unused = b.blank();
        for (std::size_t l = 0; l < net.branches.size(); ++l) {
            const Branch& br = net.branches[l];
            if (br.from == i)
                prow[p_col[l]] += 1.0;
            else if (br.to == i)
                prow[p_col[l]] -= 1.0;
        }
        add_device_terms(b, net, i, prow, unused, false);
        b.add_row(prow, fixed.p[i]);
    }

    // susceptance flow law P = theta_ij / x with the slack angle at zero
    for (std::size_t l = 0; l < net.branches.size(); ++l) {
        const Branch& br = net.branches[l];
        Vector row = b.blank();
        double rhs = 0.0;
        row[p_col[l]] = 1.0;
        put(row, rhs, t_col[br.from], -1.0 / br.x, 0.0);
        put(row, rhs, t_col[br.to], 1.0 / br.x, 0.0);
        b.add_row(row, rhs);
    }

    add_coupling_tie(b, net);
    fill_zero_losses(b.model, net.branches.size());
    return b.take();
}

EnhancedDcModel build_enhanced_dc(const Network& net, const PowerFlowState& base,
                                  const BusInjections& fixed, EnhancedLossAngle angle) {
    require_injections(net, fixed);
    require_base(net, base);

    ModelBuilder b(ModelKind::DcEnhanced);
    const std::size_t n = net.size();
    const std::size_t nb = net.branches.size();
    const std::size_t slack = net.slack();

    add_coupling_cols(b, net);
    b.add_col("Q_pcc", -kInf, kInf);
    std::vector<std::size_t> u_col(n, kNoCol), t_col(n, kNoCol);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == slack) continue;
        u_col[i] = b.add_col(bus_var("u", net, i), net.buses[i].v_min * net.buses[i].v_min,
                             net.buses[i].v_max * net.buses[i].v_max);
        t_col[i] = b.add_col(bus_var("theta", net, i), -kInf, kInf);
    }
    std::vector<std::size_t> p_col, q_col, pl_col, ql_col;
    for (const Branch& br : net.branches) {
        p_col.push_back(b.add_col(branch_var("P", net, br.from, br.to), -br.flow_limit,
                                  br.flow_limit));
        q_col.push_back(b.add_col(branch_var("Q", net, br.from, br.to), -kInf, kInf));
        pl_col.push_back(b.add_col(branch_var("Ploss", net, br.from, br.to), -kInf, kInf));
        ql_col.push_back(b.add_col(branch_var("Qloss", net, br.from, br.to), -kInf, kInf));
    }
    add_storage_cols(b, net);

    // what leaves a from-bus is the flow variable; what leaves a to-bus is
    // the reverse flow Ploss - P
    for (std::size_t i = 0; i < n; ++i) {
        Vector prow = b.blank(), qrow = b.blank();
        for (std::size_t l = 0; l < nb; ++l) {
            const Branch& br = net.branches[l];
            if (br.from == i) {
                prow[p_col[l]] += 1.0;
                qrow[q_col[l]] += 1.0;
            } else if (br.to == i) {
                prow[p_col[l]] -= 1.0;
                prow[pl_col[l]] += 1.0;
                qrow[q_col[l]] -= 1.0;
                qrow[ql_col[l]] += 1.0;
            }
        }
        add_device_terms(b, net, i, prow, qrow, true);
        b.add_row(prow, fixed.p[i]);
        b.add_row(qrow, fixed.q[i]);
    }

    LossReport report;
    report.p_loss.resize(nb);
    report.q_loss.resize(nb);
    report.negative_flags.resize(nb);

    for (std::size_t l = 0; l < nb; ++l) {
        const Branch& br = net.branches[l];
        const std::size_t i = br.from, j = br.to;
        const double g = series_g(br), bb = series_b(br);
        const double vi0 = base.v[i], vj0 = base.v[j];
        const double ui0 = vi0 * vi0, uj0 = vj0 * vj0;
        const double tij0 = base.theta[i] - base.theta[j];
        const double ploss0 = br.r * base.ell[l];
        const double qloss0 = br.x * base.ell[l];
        report.p_loss[l] = ploss0;
        report.q_loss[l] = qloss0;
        report.negative_flags[l] = ploss0 < -kNegativeLossTol;

        // flow law: P = g (u_i - u_j) / 2 - b theta_ij + Ploss / 2, anchored
        // so the base flows are reproduced exactly
        {
            Vector row = b.blank();
            double rhs = base.branch_p[l] - (g / 2.0) * ui0 + (g / 2.0) * uj0 + bb * tij0 -
                         ploss0 / 2.0;
            row[p_col[l]] = 1.0;
            row[pl_col[l]] = -0.5;
            put(row, rhs, u_col[i], -g / 2.0, ui0);
            put(row, rhs, u_col[j], g / 2.0, uj0);
            put(row, rhs, t_col[i], bb, base.theta[i]);
            put(row, rhs, t_col[j], -bb, base.theta[j]);
            b.add_row(row, rhs);
        }
        // reactive analog: Q = -b (u_i - u_j) / 2 - g theta_ij + Qloss / 2
        {
            Vector row = b.blank();
            double rhs = base.branch_q[l] + (bb / 2.0) * ui0 - (bb / 2.0) * uj0 + g * tij0 -
                         qloss0 / 2.0;
            row[q_col[l]] = 1.0;
            row[ql_col[l]] = -0.5;
            put(row, rhs, u_col[i], bb / 2.0, ui0);
            put(row, rhs, u_col[j], -bb / 2.0, uj0);
            put(row, rhs, t_col[i], g, base.theta[i]);
            put(row, rhs, t_col[j], -g, base.theta[j]);
            b.add_row(row, rhs);
        }
        // Taylor expansion of the loss g ((v_i - v_j)^2 + theta_ij^2) in the
        // squared-voltage coordinates, anchored at the exact base losses
        const double dv0 = vi0 - vj0;
        const double a_ui = g * dv0 / vi0;
        const double a_uj = -g * dv0 / vj0;
        const double a_t = angle == EnhancedLossAngle::Quadratic ? 2.0 * g * tij0 : g;
        {
            Vector row = b.blank();
            double rhs = ploss0 - a_ui * ui0 - a_uj * uj0 - a_t * tij0;
            row[pl_col[l]] = 1.0;
            put(row, rhs, u_col[i], -a_ui, ui0);
            put(row, rhs, u_col[j], -a_uj, uj0);
            put(row, rhs, t_col[i], -a_t, base.theta[i]);
            put(row, rhs, t_col[j], a_t, base.theta[j]);
            b.add_row(row, rhs);
        }
        const double aq_ui = -bb * dv0 / vi0;
        const double aq_uj = bb * dv0 / vj0;
        const double aq_t = angle == EnhancedLossAngle::Quadratic ? -2.0 * bb * tij0 : -bb;
        {
            Vector row = b.blank();
            double rhs = qloss0 - aq_ui * ui0 - aq_uj * uj0 - aq_t * tij0;
            row[ql_col[l]] = 1.0;
            put(row, rhs, u_col[i], -aq_ui, ui0);
            put(row, rhs, u_col[j], -aq_uj, uj0);
            put(row, rhs, t_col[i], -aq_t, base.theta[i]);
            put(row, rhs, t_col[j], aq_t, base.theta[j]);
            b.add_row(row, rhs);
        }
    }

    add_coupling_tie(b, net);

    b.model.loss_terms.resize(nb);
    b.model.loss_const.assign(nb, 0.0);
    b.model.qloss_terms.resize(nb);
    b.model.qloss_const.assign(nb, 0.0);
    for (std::size_t l = 0; l < nb; ++l) {
        b.model.loss_terms[l] = {{pl_col[l], 1.0}};
        b.model.qloss_terms[l] = {{ql_col[l], 1.0}};
    }

    return {b.take(), std::move(report)};
}

LinearModel build_lin_ac(const Network& net, const PowerFlowState& base,
                         const BusInjections& fixed) {
    require_injections(net, fixed);
    require_base(net, base);

    ModelBuilder b(ModelKind::LinAc);
    const std::size_t n = net.size();
    const std::size_t slack = net.slack();
    const AdmittanceMatrix y = build_ybus(net);

    Vector p_calc, q_calc;
    computed_injections(net, y, base.v, base.theta, p_calc, q_calc);

    add_coupling_cols(b, net);
    b.add_col("Q_pcc", -kInf, kInf);
    std::vector<std::size_t> v_col(n), t_col(n), p_col(n), q_col(n);
    for (std::size_t i = 0; i < n; ++i) {
        v_col[i] = b.add_col(bus_var("v", net, i), net.buses[i].v_min, net.buses[i].v_max);
        t_col[i] = b.add_col(bus_var("theta", net, i), -kInf, kInf);
        p_col[i] = b.add_col(bus_var("p", net, i), -kInf, kInf);
        q_col[i] = b.add_col(bus_var("q", net, i), -kInf, kInf);
    }
    std::vector<std::size_t> fp_col, fq_col, rp_col, rq_col;
    for (const Branch& br : net.branches) {
        fp_col.push_back(b.add_col(branch_var("P", net, br.from, br.to), -br.flow_limit,
                                   br.flow_limit));
        fq_col.push_back(b.add_col(branch_var("Q", net, br.from, br.to), -kInf, kInf));
        rp_col.push_back(b.add_col(branch_var("Prev", net, br.to, br.from), -br.flow_limit,
                                   br.flow_limit));
        rq_col.push_back(b.add_col(branch_var("Qrev", net, br.to, br.from), -kInf, kInf));
    }
    add_storage_cols(b, net);

    // linearized balance equations: p_i tracks the first-order injection at
    // every bus, constants absorb the expansion point
    for (std::size_t i = 0; i < n; ++i) {
        Vector prow = b.blank(), qrow = b.blank();
        double prhs = p_calc[i], qrhs = q_calc[i];
        prow[p_col[i]] = 1.0;
        qrow[q_col[i]] = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            const InjectionDerivatives d =
                injection_derivatives(y, base.v, base.theta, p_calc, q_calc, i, j);
            prow[t_col[j]] -= d.dp_dt;
            prow[v_col[j]] -= d.dp_dv;
            qrow[t_col[j]] -= d.dq_dt;
            qrow[v_col[j]] -= d.dq_dv;
            prhs -= d.dp_dt * base.theta[j] + d.dp_dv * base.v[j];
            qrhs -= d.dq_dt * base.theta[j] + d.dq_dv * base.v[j];
        }
        b.add_row(prow, prhs);
        b.add_row(qrow, qrhs);
    }

    // device ties pin the injections to fixed plus storage and PCC exchange
    for (std::size_t i = 0; i < n; ++i) {
        Vector prow = b.blank(), qrow = b.blank();
        prow[p_col[i]] = 1.0;
        qrow[q_col[i]] = 1.0;
        add_device_terms(b, net, i, prow, qrow, true);
        b.add_row(prow, fixed.p[i]);
        b.add_row(qrow, fixed.q[i]);
    }

    // slack references
    {
        Vector row = b.blank();
        row[v_col[slack]] = 1.0;
        b.add_row(row, base.v[slack]);
    }
    {
        Vector row = b.blank();
        row[t_col[slack]] = 1.0;
        b.add_row(row, 0.0);
    }

    // branch flows in both directions from the polar flow equations
    for (std::size_t l = 0; l < net.branches.size(); ++l) {
        const Branch& br = net.branches[l];
        const std::size_t i = br.from, j = br.to;
        const double g = series_g(br), bb = series_b(br);
        const double tij0 = base.theta[i] - base.theta[j];
        const auto add_flow_row = [&](std::size_t col, const FlowLin& f, std::size_t si,
                                      std::size_t sj, double ti0, double tj0, double vi0,
                                      double vj0) {
            Vector row = b.blank();
            row[col] = 1.0;
            row[v_col[si]] -= f.dvi;
            row[v_col[sj]] -= f.dvj;
            row[t_col[si]] -= f.dtij;
            row[t_col[sj]] += f.dtij;
            const double rhs = f.value - f.dvi * vi0 - f.dvj * vj0 - f.dtij * (ti0 - tj0);
            b.add_row(row, rhs);
        };
        add_flow_row(fp_col[l], p_flow_lin(g, bb, base.v[i], base.v[j], tij0), i, j,
                     base.theta[i], base.theta[j], base.v[i], base.v[j]);
        add_flow_row(fq_col[l], q_flow_lin(g, bb, base.v[i], base.v[j], tij0), i, j,
                     base.theta[i], base.theta[j], base.v[i], base.v[j]);
        add_flow_row(rp_col[l], p_flow_lin(g, bb, base.v[j], base.v[i], -tij0), j, i,
                     base.theta[j], base.theta[i], base.v[j], base.v[i]);
        add_flow_row(rq_col[l], q_flow_lin(g, bb, base.v[j], base.v[i], -tij0), j, i,
                     base.theta[j], base.theta[i], base.v[j], base.v[i]);
    }

    add_coupling_tie(b, net);

    const std::size_t nb = net.branches.size();
    b.model.loss_terms.resize(nb);
    b.model.loss_const.assign(nb, 0.0);
    b.model.qloss_terms.resize(nb);
    b.model.qloss_const.assign(nb, 0.0);
    for (std::size_t l = 0; l < nb; ++l) {
        b.model.loss_terms[l] = {{fp_col[l], 1.0}, {rp_col[l], 1.0}};
        b.model.qloss_terms[l] = {{fq_col[l], 1.0}, {rq_col[l], 1.0}};
    }

    return b.take();
}

LossReport detect_negative_losses(const LinearModel& model, const Vector& point) {
    if (point.size() != model.cols()) throw Error("point size does not match model columns");
    const std::size_t nb = model.loss_terms.size();
    LossReport rep;
    rep.p_loss.resize(nb);
    rep.q_loss.resize(nb);
    rep.negative_flags.resize(nb);
    for (std::size_t l = 0; l < nb; ++l) {
        double p = model.loss_const[l];
        for (const auto& [col, coeff] : model.loss_terms[l]) p += coeff * point[col];
        double q = model.qloss_const[l];
        for (const auto& [col, coeff] : model.qloss_terms[l]) q += coeff * point[col];
        rep.p_loss[l] = p;
        rep.q_loss[l] = q;
        rep.negative_flags[l] = p < -kNegativeLossTol;
    }
    return rep;
}

std::string model_to_json(const LinearModel& model) {
    nlohmann::json j;
    j["model_kind"] = to_string(model.kind);
    const auto bound = [](double v) {
        return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
    };
    nlohmann::json xb = nlohmann::json::array(), yb = nlohmann::json::array();
    for (std::size_t k = 0; k < model.cols(); ++k) {
        nlohmann::json pair = {bound(model.lo[k]), bound(model.hi[k])};
        (k < model.nx ? xb : yb).push_back(std::move(pair));
    }
    j["x_bounds"] = std::move(xb);
    j["y_bounds"] = std::move(yb);
    nlohmann::json a = nlohmann::json::array(), bm = nlohmann::json::array(),
                   c = nlohmann::json::array();
    for (std::size_t r = 0; r < model.rows.rows(); ++r) {
        nlohmann::json ar = nlohmann::json::array(), br = nlohmann::json::array();
        for (std::size_t k = 0; k < model.cols(); ++k)
            (k < model.nx ? ar : br).push_back(model.rows(r, k));
        a.push_back(std::move(ar));
        bm.push_back(std::move(br));
        c.push_back(model.c[r]);
    }
    j["a"] = std::move(a);
    j["b"] = std::move(bm);
    j["c"] = std::move(c);
    j["var_index"] = model.var_index;
    return j.dump(2) + "\n";
}

LinearModel build_step_model(ModelKind kind, const Network& net, const BusInjections& fixed,
                             const PowerFlowState* base) {
    switch (kind) {
        case ModelKind::LinDistFlow: return build_lindistflow(net, fixed);
        case ModelKind::Dc: return build_dc(net, fixed);
        case ModelKind::DcEnhanced:
            if (!base) throw Error("dc_enhanced needs a base operating point");
            return build_enhanced_dc(net, *base, fixed).model;
        case ModelKind::LinAc:
            if (!base) throw Error("lin_ac needs a base operating point");
            return build_lin_ac(net, *base, fixed);
    }
    throw Error("unknown model kind");
}

std::vector<std::string> model_feature_row(ModelKind kind) {
    switch (kind) {
        case ModelKind::LinDistFlow: return {"radial", "squared", "-", "standard", "-"};
        case ModelKind::Dc: return {"meshed", "standard", "-", "-", "-"};
        case ModelKind::DcEnhanced:
            return {"meshed", "squared", "standard", "standard", "linearized"};
        case ModelKind::LinAc:
            return {"meshed", "standard", "standard", "standard", "linearized"};
    }
    return {};
}

}  // namespace gridflex
