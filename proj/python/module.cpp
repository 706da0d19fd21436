// Python bindings for the gridflex core: network I/O, power flow, linear
// models, flexibility envelopes, scheduling, verification and campaigns.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "gridflex/acpf.hpp"
#include "gridflex/aggregation.hpp"
#include "gridflex/campaign.hpp"
#include "gridflex/linear_model.hpp"
#include "gridflex/network.hpp"
#include "gridflex/profiles.hpp"
#include "gridflex/scheduling.hpp"
#include "gridflex/verification.hpp"

namespace py = pybind11;
using namespace gridflex;

namespace {

std::vector<Vector> matrix_rows(const Matrix& m) {
    std::vector<Vector> out;
    out.reserve(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(m.row(r));
    return out;
}

std::string bus_kind_name(BusKind kind) {
    return kind == BusKind::Slack ? "slack" : "pq";
}

BusKind bus_kind_from(const std::string& name) {
    if (name == "slack") return BusKind::Slack;
    if (name == "pq") return BusKind::Pq;
    throw Error("unknown bus kind '" + name + "' (expected 'slack' or 'pq')");
}

const PowerFlowState* base_ptr(const std::optional<PowerFlowState>& base) {
    return base.has_value() ? &base.value() : nullptr;
}

}  // namespace

PYBIND11_MODULE(_gridflex, m) {
    m.doc() = "Linear power flow models, flexibility aggregation and storage "
              "scheduling on distribution feeders";

    py::register_exception<Error>(m, "GridflexError", PyExc_RuntimeError);

    py::class_<Bus>(m, "Bus")
        .def(py::init<>())
        .def_readwrite("id", &Bus::id)
        .def_property(
            "kind", [](const Bus& b) { return bus_kind_name(b.kind); },
            [](Bus& b, const std::string& name) { b.kind = bus_kind_from(name); })
        .def_readwrite("v_min", &Bus::v_min)
        .def_readwrite("v_max", &Bus::v_max)
        .def_readwrite("p_load", &Bus::p_load)
        .def_readwrite("q_load", &Bus::q_load)
        .def("__repr__", [](const Bus& b) {
            std::ostringstream out;
            out << "Bus(id=" << b.id << ", kind='" << bus_kind_name(b.kind) << "')";
            return out.str();
        });

    py::class_<Branch>(m, "Branch")
        .def(py::init<>())
        .def_readwrite("from_bus", &Branch::from)
        .def_readwrite("to_bus", &Branch::to)
        .def_readwrite("r", &Branch::r)
        .def_readwrite("x", &Branch::x)
        .def_readwrite("flow_limit", &Branch::flow_limit)
        .def("__repr__", [](const Branch& b) {
            std::ostringstream out;
            out << "Branch(" << b.from << " -> " << b.to << ", r=" << b.r << ", x=" << b.x << ")";
            return out.str();
        });

    py::class_<StorageUnit>(m, "StorageUnit")
        .def(py::init<>())
        .def_readwrite("bus", &StorageUnit::bus)
        .def_readwrite("p_max", &StorageUnit::p_max)
        .def_readwrite("e_cap", &StorageUnit::e_cap)
        .def_readwrite("soc_init", &StorageUnit::soc_init)
        .def_readwrite("soc_final", &StorageUnit::soc_final);

    py::class_<PvUnit>(m, "PvUnit")
        .def(py::init<>())
        .def_readwrite("bus", &PvUnit::bus)
        .def_readwrite("p_max", &PvUnit::p_max);

    py::class_<Network>(m, "Network")
        .def(py::init<>())
        .def_readwrite("base_mva", &Network::base_mva)
        .def_readwrite("buses", &Network::buses)
        .def_readwrite("branches", &Network::branches)
        .def_readwrite("storage", &Network::storage)
        .def_readwrite("pv", &Network::pv)
        .def("size", &Network::size)
        .def("slack", &Network::slack)
        .def("id_of", &Network::id_of)
        .def("index_of", &Network::index_of)
        .def("storage_energy_capacity", &Network::storage_energy_capacity)
        .def("storage_power_capacity", &Network::storage_power_capacity)
        .def("to_json", &network_to_json)
        .def("__repr__", [](const Network& n) {
            std::ostringstream out;
            out << "Network(" << n.buses.size() << " buses, " << n.branches.size()
                << " branches, " << n.storage.size() << " storage, " << n.pv.size() << " pv)";
            return out.str();
        });

    m.def("load_network", &load_network, py::arg("path"));
    m.def("save_network", &save_network, py::arg("net"), py::arg("path"));
    m.def("network_from_json", &network_from_json, py::arg("text"));
    m.def("network_to_json", &network_to_json, py::arg("net"));
    m.def("validate_network", &validate_network, py::arg("net"));
    m.def("check_radial", &check_radial, py::arg("net"));
    m.def("generate_campus_like", &generate_campus_like, py::arg("seed") = 1u);
    m.def("to_physical_mw", &to_physical_mw, py::arg("net"), py::arg("value_pu"));
    m.def("to_per_unit", &to_per_unit, py::arg("net"), py::arg("value_mw"));

    py::class_<DayProfile>(m, "DayProfile")
        .def(py::init<>())
        .def_readwrite("load_pu", &DayProfile::load_pu)
        .def_readwrite("pv_pu", &DayProfile::pv_pu)
        .def_readwrite("dt_hours", &DayProfile::dt_hours)
        .def("steps", &DayProfile::steps)
        .def("to_csv", &profile_to_csv);

    m.def("load_profile", &load_profile, py::arg("path"));
    m.def("save_profile", &save_profile, py::arg("profile"), py::arg("path"));
    m.def("profile_from_csv", &profile_from_csv, py::arg("text"));
    m.def("default_workday_profile", &default_workday_profile);

    py::class_<BusInjections>(m, "BusInjections")
        .def(py::init<>())
        .def_readwrite("p", &BusInjections::p)
        .def_readwrite("q", &BusInjections::q);

    m.def("base_injections", &base_injections, py::arg("net"), py::arg("load_pu"),
          py::arg("pv_pu"));

    py::class_<PowerFlowState>(m, "PowerFlowState")
        .def(py::init<>())
        .def_readwrite("v", &PowerFlowState::v)
        .def_readwrite("theta", &PowerFlowState::theta)
        .def_readwrite("p", &PowerFlowState::p)
        .def_readwrite("q", &PowerFlowState::q)
        .def_readwrite("branch_p", &PowerFlowState::branch_p)
        .def_readwrite("branch_q", &PowerFlowState::branch_q)
        .def_readwrite("ell", &PowerFlowState::ell)
        .def_readonly("iterations", &PowerFlowState::iterations)
        .def_readonly("residual_norm", &PowerFlowState::residual_norm);

    py::class_<DistFlowState>(m, "DistFlowState")
        .def(py::init<>())
        .def_readwrite("u", &DistFlowState::u)
        .def_readwrite("branch_p", &DistFlowState::branch_p)
        .def_readwrite("branch_q", &DistFlowState::branch_q)
        .def_readwrite("ell", &DistFlowState::ell)
        .def_readonly("iterations", &DistFlowState::iterations)
        .def_readonly("residual_norm", &DistFlowState::residual_norm);

    m.def(
        "solve_ac",
        [](const Network& net, const BusInjections& inj, int max_iterations, double tolerance) {
            AcSolveOptions opt;
            opt.max_iterations = max_iterations;
            opt.tolerance = tolerance;
            return solve_ac(net, inj, opt);
        },
        py::arg("net"), py::arg("injections"), py::arg("max_iterations") = 50,
        py::arg("tolerance") = 1e-10);
    m.def(
        "solve_distflow",
        [](const Network& net, const BusInjections& inj, int max_iterations, double tolerance) {
            AcSolveOptions opt;
            opt.max_iterations = max_iterations;
            opt.tolerance = tolerance;
            return solve_distflow(net, inj, opt);
        },
        py::arg("net"), py::arg("injections"), py::arg("max_iterations") = 50,
        py::arg("tolerance") = 1e-10);
    m.def("total_losses",
          py::overload_cast<const PowerFlowState&, const Network&>(&total_losses),
          py::arg("state"), py::arg("net"));
    m.def("total_distflow_losses",
          py::overload_cast<const DistFlowState&, const Network&>(&total_losses),
          py::arg("state"), py::arg("net"));

    py::class_<LinearModel>(m, "LinearModel")
        .def_property_readonly("kind", [](const LinearModel& mod) {
            return std::string(to_string(mod.kind));
        })
        .def_property_readonly("nx", [](const LinearModel& mod) { return mod.nx; })
        .def_property_readonly("column_names",
                               [](const LinearModel& mod) { return mod.col_names; })
        .def("cols", &LinearModel::cols)
        .def("rows", [](const LinearModel& mod) { return mod.rows.rows(); })
        .def("col", &LinearModel::col, py::arg("name"))
        .def("to_json", &model_to_json);

    m.def(
        "build_step_model",
        [](const std::string& kind, const Network& net, const BusInjections& fixed,
           const std::optional<PowerFlowState>& base) {
            return build_step_model(model_kind_from_string(kind), net, fixed, base_ptr(base));
        },
        py::arg("kind"), py::arg("net"), py::arg("fixed"), py::arg("base") = std::nullopt);
    m.def("model_feature_row", [](const std::string& kind) {
        return model_feature_row(model_kind_from_string(kind));
    });

    py::class_<Halfspace>(m, "Halfspace")
        .def(py::init<>())
        .def_readwrite("n", &Halfspace::n)
        .def_readwrite("h", &Halfspace::h);

    py::class_<FlexibilityEnvelope>(m, "FlexibilityEnvelope")
        .def(py::init<>())
        .def_property_readonly("kind", [](const FlexibilityEnvelope& env) {
            return std::string(to_string(env.kind));
        })
        .def_readwrite("halfspaces", &FlexibilityEnvelope::halfspaces)
        .def_readwrite("labels", &FlexibilityEnvelope::labels)
        .def_readwrite("provenance", &FlexibilityEnvelope::provenance)
        .def_readwrite("dt_hours", &FlexibilityEnvelope::dt_hours)
        .def_readwrite("e_init", &FlexibilityEnvelope::e_init)
        .def_readwrite("feasible_point", &FlexibilityEnvelope::feasible_point)
        .def_readonly("dropped_directions", &FlexibilityEnvelope::dropped_directions)
        .def("dims", &FlexibilityEnvelope::dims)
        .def(
            "contains",
            [](const FlexibilityEnvelope& env, const Vector& x, double slack) {
                return envelope_contains(env, x, slack);
            },
            py::arg("x"), py::arg("slack") = 1e-7)
        .def("to_json", &envelope_to_json);

    m.def(
        "build_envelope",
        [](const Network& net, const std::string& kind, const DayProfile& profiles,
           std::size_t horizon, std::size_t directions,
           const std::optional<PowerFlowState>& base) {
            return build_envelope(net, model_kind_from_string(kind), base_ptr(base), profiles,
                                  horizon, directions);
        },
        py::arg("net"), py::arg("kind"), py::arg("profiles"), py::arg("horizon"),
        py::arg("directions") = 64, py::arg("base") = std::nullopt);
    m.def("envelope_from_json", &envelope_from_json, py::arg("text"));
    m.def("load_envelope", &load_envelope, py::arg("path"));
    m.def("save_envelope", &save_envelope, py::arg("env"), py::arg("path"));

    py::class_<ScheduleProblem>(m, "ScheduleProblem")
        .def(py::init<>())
        .def_readwrite("horizon", &ScheduleProblem::horizon)
        .def_readwrite("profiles", &ScheduleProblem::profiles)
        .def_readwrite("alpha", &ScheduleProblem::alpha)
        .def_readwrite("beta", &ScheduleProblem::beta)
        .def_readwrite("storage", &ScheduleProblem::storage);

    m.def("make_schedule_problem", &make_schedule_problem, py::arg("net"), py::arg("profiles"),
          py::arg("horizon"), py::arg("alpha") = 1.0, py::arg("beta") = 0.0);

    py::class_<ScheduleResult>(m, "ScheduleResult")
        .def(py::init<>())
        .def_property_readonly("status", [](const ScheduleResult& res) {
            return std::string(to_string(res.status));
        })
        .def_readwrite("p_pcc", &ScheduleResult::p_pcc)
        .def_readwrite("e_agg", &ScheduleResult::e_agg)
        .def_property_readonly("unit_powers", [](const ScheduleResult& res) {
            return matrix_rows(res.unit_powers);
        })
        .def_readonly("objective", &ScheduleResult::objective)
        .def_readonly("kkt_residual", &ScheduleResult::kkt_residual)
        .def_readonly("iterations", &ScheduleResult::iterations);

    m.def("schedule_over_envelope", &schedule_over_envelope, py::arg("problem"),
          py::arg("envelope"));
    m.def("schedule_full_linear", &schedule_full_linear, py::arg("problem"),
          py::arg("step_models"));
    m.def("schedule_ac_benchmark", &schedule_ac_benchmark, py::arg("problem"), py::arg("net"));
    m.def("disaggregate_power", &disaggregate_power, py::arg("fleet"), py::arg("aggregate"));
    m.def("schedule_to_csv", &schedule_to_csv, py::arg("problem"), py::arg("result"));
    m.def("schedule_from_csv", &schedule_from_csv, py::arg("text"));
    m.def("schedule_summary_json", &schedule_summary_json, py::arg("problem"), py::arg("result"));

    py::class_<Violation>(m, "Violation")
        .def_readonly("step", &Violation::step)
        .def_property_readonly("kind", [](const Violation& v) {
            return std::string(to_string(v.kind));
        })
        .def_readonly("magnitude", &Violation::magnitude)
        .def("__repr__", [](const Violation& v) {
            std::ostringstream out;
            out << "Violation(step=" << v.step << ", kind='" << to_string(v.kind)
                << "', magnitude=" << v.magnitude << ")";
            return out.str();
        });

    py::class_<VerificationReport>(m, "VerificationReport")
        .def_readonly("p_pcc", &VerificationReport::p_pcc)
        .def_readonly("realized_losses", &VerificationReport::realized_losses)
        .def_readonly("model_losses", &VerificationReport::model_losses)
        .def_readonly("loss_error", &VerificationReport::loss_error)
        .def_readonly("cumulative_loss_error", &VerificationReport::cumulative_loss_error)
        .def_property_readonly("soc_units", [](const VerificationReport& rep) {
            return matrix_rows(rep.soc_units);
        })
        .def_readonly("soc_agg", &VerificationReport::soc_agg)
        .def_readonly("violations", &VerificationReport::violations)
        .def_readonly("final_soc_target", &VerificationReport::final_soc_target)
        .def_readonly("dt_hours", &VerificationReport::dt_hours)
        .def("to_csv", &verification_to_csv)
        .def("violations_json", &violations_to_json);

    m.def("verify_schedule", &verify_schedule, py::arg("net"), py::arg("schedule"),
          py::arg("profiles"));

    py::class_<CampaignConfig>(m, "CampaignConfig")
        .def(py::init<>())
        .def_readwrite("network_path", &CampaignConfig::network_path)
        .def_readwrite("profiles_path", &CampaignConfig::profiles_path)
        .def_readwrite("models", &CampaignConfig::models)
        .def_readwrite("horizon", &CampaignConfig::horizon)
        .def_readwrite("directions", &CampaignConfig::directions)
        .def_readwrite("alpha", &CampaignConfig::alpha)
        .def_readwrite("beta", &CampaignConfig::beta)
        .def_readwrite("out_dir", &CampaignConfig::out_dir)
        .def_readwrite("seed", &CampaignConfig::seed)
        .def("to_json", &campaign_config_to_json);

    m.def("campaign_config_from_json", &campaign_config_from_json, py::arg("text"));
    m.def("load_campaign_config", &load_campaign_config, py::arg("path"));
    m.def("run_campaign", &run_campaign, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
}
