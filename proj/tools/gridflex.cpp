#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gridflex/acpf.hpp"
#include "gridflex/aggregation.hpp"
#include "gridflex/campaign.hpp"
#include "gridflex/linear_model.hpp"
#include "gridflex/network.hpp"
#include "gridflex/profiles.hpp"
#include "gridflex/scheduling.hpp"
#include "gridflex/verification.hpp"

namespace gf = gridflex;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gf::Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw gf::Error("cannot write " + out_path);
    out << text;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    cells.push_back(cell);
    return cells;
}

// Discriminated power-flow CSV: bus rows carry v, theta, p, q; branch rows
// carry from-side P, Q and the squared current; one total_losses row.
std::string pf_to_csv(const gf::Network& net, const gf::PowerFlowState& st) {
    std::string csv = "record,id,v,theta,p,q,ell\n";
    char buf[192];
    for (std::size_t i = 0; i < net.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "bus,%zu,%.17g,%.17g,%.17g,%.17g,\n", i, st.v[i],
                      st.theta[i], st.p[i], st.q[i]);
        csv += buf;
    }
    for (std::size_t l = 0; l < net.branches.size(); ++l) {
        std::snprintf(buf, sizeof(buf), "branch,%zu->%zu,,,%.17g,%.17g,%.17g\n",
                      net.branches[l].from, net.branches[l].to, st.branch_p[l], st.branch_q[l],
                      st.ell[l]);
        csv += buf;
    }
    std::snprintf(buf, sizeof(buf), "total_losses,,,,%.17g,,\n", gf::total_losses(st, net));
    csv += buf;
    return csv;
}

gf::PowerFlowState pf_from_csv(const gf::Network& net, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line)[0] != "record")
        throw gf::Error("bad power-flow csv header");
    gf::PowerFlowState st;
    st.v.resize(net.size());
    st.theta.resize(net.size());
    st.p.resize(net.size());
    st.q.resize(net.size());
    st.branch_p.resize(net.branches.size());
    st.branch_q.resize(net.branches.size());
    st.ell.resize(net.branches.size());
    std::size_t buses = 0, branches = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells[0] == "bus") {
            if (cells.size() < 6) throw gf::Error("short bus row in power-flow csv");
            const std::size_t i = std::stoul(cells[1]);
            if (i >= net.size()) throw gf::Error("bus index out of range in power-flow csv");
            st.v[i] = std::stod(cells[2]);
            st.theta[i] = std::stod(cells[3]);
            st.p[i] = std::stod(cells[4]);
            st.q[i] = std::stod(cells[5]);
            ++buses;
        } else if (cells[0] == "branch") {
            if (cells.size() < 7) throw gf::Error("short branch row in power-flow csv");
            if (branches >= net.branches.size())
                throw gf::Error("too many branch rows in power-flow csv");
            st.branch_p[branches] = std::stod(cells[4]);
            st.branch_q[branches] = std::stod(cells[5]);
            st.ell[branches] = std::stod(cells[6]);
            ++branches;
        } else if (cells[0] != "total_losses") {
            throw gf::Error("unknown record '" + cells[0] + "' in power-flow csv");
        }
    }
    if (buses != net.size() || branches != net.branches.size())
        throw gf::Error("power-flow csv does not match the network");
    return st;
}

gf::BusInjections injections_from_csv(const gf::Network& net, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw gf::Error("empty injections csv");
    {
        const std::vector<std::string> head = split_csv_line(line);
        if (head.size() != 3 || head[0] != "bus" || head[1] != "p" || head[2] != "q")
            throw gf::Error("injections csv must start with 'bus,p,q'");
    }
    gf::BusInjections inj;
    inj.p.assign(net.size(), 0.0);
    inj.q.assign(net.size(), 0.0);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != 3) throw gf::Error("bad injections row: " + line);
        const std::size_t bus = std::stoul(cells[0]);
        if (bus >= net.size()) throw gf::Error("injection bus out of range: " + cells[0]);
        inj.p[bus] = std::stod(cells[1]);
        inj.q[bus] = std::stod(cells[2]);
    }
    return inj;
}

gf::PowerFlowState average_base(const gf::Network& net, const gf::DayProfile& profiles,
                                std::size_t horizon) {
    double load = 0.0, pv = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        load += profiles.load_pu[t];
        pv += profiles.pv_pu[t];
    }
    load /= double(horizon);
    pv /= double(horizon);
    return gf::solve_ac(net, gf::base_injections(net, load, pv));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridflex: linear power flow models for flexibility aggregation"};
    app.require_subcommand(1);

    std::string net_path, out_path, injections_path;
    double load_pu = 1.0, pv_pu = 1.0;

    auto* pf = app.add_subcommand("pf", "solve the AC power flow and print the state as CSV");
    pf->add_option("--net", net_path, "network JSON file")->required();
    pf->add_option("--injections", injections_path,
                   "per-bus net injection CSV 'bus,p,q'; default: network loads and pv ratings");
    pf->add_option("--load-pu", load_pu, "load multiplier when --injections is absent");
    pf->add_option("--pv-pu", pv_pu, "pv multiplier when --injections is absent");
    pf->add_option("--out", out_path, "output file, '-' for stdout");

    std::string kind_name, base_path;
    auto* model = app.add_subcommand("model", "build one linear step model and dump it as JSON");
    model->add_option("--kind", kind_name, "lindistflow | dc | dc-enhanced | lin-ac")->required();
    model->add_option("--net", net_path, "network JSON file")->required();
    model->add_option("--base", base_path,
                      "linearization state as a pf CSV; default: AC solve at nominal loading");
    model->add_option("--load-pu", load_pu, "load multiplier for the fixed injections");
    model->add_option("--pv-pu", pv_pu, "pv multiplier for the fixed injections");
    model->add_option("--out", out_path, "output file, '-' for stdout");

    std::string profiles_path;
    std::size_t horizon = 24, directions = 64;
    auto* agg = app.add_subcommand("aggregate", "project the day's feasible set to the PCC");
    agg->add_option("--net", net_path, "network JSON file")->required();
    agg->add_option("--model", kind_name, "lindistflow | dc | dc-enhanced | lin-ac")->required();
    agg->add_option("--profiles", profiles_path, "day profile CSV 'hour,load_pu,pv_pu'")
        ->required();
    agg->add_option("--horizon", horizon, "number of steps");
    agg->add_option("--directions", directions, "support directions per step");
    agg->add_option("--out", out_path, "output file, '-' for stdout");

    double alpha = 1.0, beta = 0.0;
    std::string envelope_path, summary_path;
    auto* sched = app.add_subcommand("schedule", "day-ahead dispatch against one model");
    sched->add_option("--net", net_path, "network JSON file")->required();
    sched->add_option("--model", kind_name, "model kind, 'ac', or 'envelope'")->required();
    sched->add_option("--profiles", profiles_path, "day profile CSV")->required();
    sched->add_option("--alpha", alpha, "quadratic PCC cost coefficient");
    sched->add_option("--beta", beta, "linear PCC cost coefficient");
    sched->add_option("--horizon", horizon, "number of steps");
    sched->add_option("--directions", directions, "support directions (envelope built from kind)");
    sched->add_option("--envelope", envelope_path, "envelope JSON (required for 'envelope')");
    sched->add_option("--out", out_path, "schedule CSV output, '-' for stdout");
    sched->add_option("--summary", summary_path, "also write a JSON summary here");

    std::string schedule_path, violations_path;
    auto* verify = app.add_subcommand("verify", "replay a schedule against the AC model");
    verify->add_option("--net", net_path, "network JSON file")->required();
    verify->add_option("--schedule", schedule_path, "schedule CSV")->required();
    verify->add_option("--profiles", profiles_path, "day profile CSV")->required();
    verify->add_option("--out", out_path, "verification CSV output, '-' for stdout");
    verify->add_option("--violations", violations_path, "also write the violations JSON here");

    std::string config_path;
    auto* run = app.add_subcommand("run", "full campaign from a config file");
    run->add_option("--config", config_path, "campaign config JSON")->required();

    try {
        app.parse(argc, argv);

        if (*pf) {
            const gf::Network net = gf::load_network(net_path);
            const gf::BusInjections inj =
                injections_path.empty() ? gf::base_injections(net, load_pu, pv_pu)
                                        : injections_from_csv(net, slurp(injections_path));
            emit(pf_to_csv(net, gf::solve_ac(net, inj)), out_path);
        } else if (*model) {
            const gf::Network net = gf::load_network(net_path);
            const gf::ModelKind kind = gf::model_kind_from_string(kind_name);
            const gf::BusInjections fixed = gf::base_injections(net, load_pu, pv_pu);
            gf::PowerFlowState base;
            const bool needs_base =
                kind == gf::ModelKind::DcEnhanced || kind == gf::ModelKind::LinAc;
            if (needs_base)
                base = base_path.empty()
                           ? gf::solve_ac(net, gf::base_injections(net, 1.0, 1.0))
                           : pf_from_csv(net, slurp(base_path));
            emit(gf::model_to_json(gf::build_step_model(kind, net, fixed,
                                                        needs_base ? &base : nullptr)),
                 out_path);
        } else if (*agg) {
            const gf::Network net = gf::load_network(net_path);
            const gf::DayProfile profiles = gf::load_profile(profiles_path);
            if (profiles.steps() < horizon) throw gf::Error("profiles shorter than the horizon");
            const gf::ModelKind kind = gf::model_kind_from_string(kind_name);
            const gf::PowerFlowState base = average_base(net, profiles, horizon);
            emit(gf::envelope_to_json(
                     gf::build_envelope(net, kind, &base, profiles, horizon, directions)),
                 out_path);
        } else if (*sched) {
            const gf::Network net = gf::load_network(net_path);
            const gf::DayProfile profiles = gf::load_profile(profiles_path);
            if (profiles.steps() < horizon) throw gf::Error("profiles shorter than the horizon");
            const gf::ScheduleProblem prob =
                gf::make_schedule_problem(net, profiles, horizon, alpha, beta);
            gf::ScheduleResult res;
            if (kind_name == "ac") {
                res = gf::schedule_ac_benchmark(prob, net);
            } else if (kind_name == "envelope") {
                if (envelope_path.empty())
                    throw gf::Error("--model envelope needs --envelope <json>");
                res = gf::schedule_over_envelope(prob, gf::load_envelope(envelope_path));
            } else {
                const gf::ModelKind kind = gf::model_kind_from_string(kind_name);
                const gf::PowerFlowState base = average_base(net, profiles, horizon);
                res = gf::schedule_over_envelope(
                    prob, gf::build_envelope(net, kind, &base, profiles, horizon, directions));
            }
            emit(gf::schedule_to_csv(prob, res), out_path);
            if (!summary_path.empty()) emit(gf::schedule_summary_json(prob, res), summary_path);
        } else if (*verify) {
            const gf::Network net = gf::load_network(net_path);
            const gf::DayProfile profiles = gf::load_profile(profiles_path);
            const gf::ScheduleResult res = gf::schedule_from_csv(slurp(schedule_path));
            const gf::VerificationReport rep = gf::verify_schedule(net, res, profiles);
            emit(gf::verification_to_csv(rep), out_path);
            if (!violations_path.empty()) emit(gf::violations_to_json(rep), violations_path);
        } else if (*run) {
            return gf::run_campaign(gf::load_campaign_config(config_path));
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
