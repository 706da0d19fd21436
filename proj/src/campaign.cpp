#include "gridflex/campaign.hpp"

#include <json.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "gridflex/acpf.hpp"
#include "gridflex/aggregation.hpp"
#include "gridflex/linear_model.hpp"
#include "gridflex/network.hpp"
#include "gridflex/profiles.hpp"
#include "gridflex/scheduling.hpp"
#include "gridflex/svg.hpp"
#include "gridflex/verification.hpp"

namespace fs = std::filesystem;

namespace gridflex {

namespace {

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string canonical_model_name(const std::string& raw) {
    std::string s;
    for (char c : raw) s += c == '-' ? '_' : char(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

struct BranchPlan {
    std::string name;  // canonical; directory and report label
    bool is_ac = false;
    ModelKind kind = ModelKind::LinDistFlow;
};

struct BranchResult {
    ScheduleResult schedule;
    VerificationReport report;
    int negative_losses = -1;
};

// Per step, pin (P_pcc, C_agg) of a fresh model to the scheduled point and
// evaluate the modeled branch losses there.
int probe_negative_losses(const Network& net, ModelKind kind, const PowerFlowState& base,
                          const DayProfile& profiles, const ScheduleResult& sched) {
    double e_prev = 0.0;
    for (const StorageUnit& s : net.storage) e_prev += s.soc_init * s.e_cap;
    for (std::size_t t = 0; t < sched.p_pcc.size(); ++t) {
        const BusInjections fixed = base_injections(net, profiles.load_pu[t], profiles.pv_pu[t]);
        const LinearModel m = build_step_model(kind, net, fixed, &base);
        Vector target(2);
        target[0] = sched.p_pcc[t];
        target[1] = (sched.e_agg[t] - e_prev) / profiles.dt_hours;
        e_prev = sched.e_agg[t];
        if (detect_negative_losses(m, nearest_model_point(m, target)).any_negative()) return 1;
    }
    return 0;
}

BranchResult run_branch(const BranchPlan& plan, const Network& net, const DayProfile& profiles,
                        const PowerFlowState& base, const CampaignConfig& cfg) {
    const fs::path dir = fs::path(cfg.out_dir) / plan.name;
    fs::create_directories(dir);
    const ScheduleProblem prob =
        make_schedule_problem(net, profiles, cfg.horizon, cfg.alpha, cfg.beta);

    BranchResult out;
    if (plan.is_ac) {
        out.schedule = schedule_ac_benchmark(prob, net);
    } else {
        const FlexibilityEnvelope env =
            build_envelope(net, plan.kind, &base, profiles, cfg.horizon, cfg.directions);
        save_envelope(env, (dir / "envelope.json").string());
        out.schedule = schedule_over_envelope(prob, env);
    }
    if (out.schedule.status != ScheduleStatus::Optimal)
        throw Error("scheduling infeasible for model " + plan.name);
    write_file(dir / "schedule.csv", schedule_to_csv(prob, out.schedule));
    write_file(dir / "summary.json", schedule_summary_json(prob, out.schedule));

    out.report = verify_schedule(net, out.schedule, profiles);
    write_file(dir / "verification.csv", verification_to_csv(out.report));
    write_file(dir / "violations.json", violations_to_json(out.report));

    if (!plan.is_ac && (plan.kind == ModelKind::DcEnhanced || plan.kind == ModelKind::LinAc))
        out.negative_losses = probe_negative_losses(net, plan.kind, base, profiles, out.schedule);
    return out;
}

Vector hour_axis(std::size_t count, double dt, double first) {
    Vector x(count);
    for (std::size_t i = 0; i < count; ++i) x[i] = first + dt * double(i);
    return x;
}

}  // namespace

CampaignConfig campaign_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("bad campaign config: ") + e.what());
    }
    CampaignConfig cfg;
    cfg.network_path = j.value("network", "");
    cfg.profiles_path = j.value("profiles", "");
    if (!j.contains("models") || !j["models"].is_array() || j["models"].empty())
        throw Error("campaign config needs a non-empty models list");
    for (const auto& m : j["models"]) cfg.models.push_back(m.get<std::string>());
    cfg.horizon = j.value("horizon", std::size_t{24});
    cfg.directions = j.value("directions", std::size_t{64});
    cfg.alpha = j.value("alpha", 1.0);
    cfg.beta = j.value("beta", 0.0);
    cfg.out_dir = j.value("out_dir", "out");
    cfg.seed = j.value("seed", 1u);
    return cfg;
}

std::string campaign_config_to_json(const CampaignConfig& cfg) {
    nlohmann::json j;
    j["network"] = cfg.network_path;
    j["profiles"] = cfg.profiles_path;
    j["models"] = cfg.models;
    j["horizon"] = cfg.horizon;
    j["directions"] = cfg.directions;
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["out_dir"] = cfg.out_dir;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

CampaignConfig load_campaign_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return campaign_config_from_json(buf.str());
}

int run_campaign(const CampaignConfig& cfg) {
    if (cfg.models.empty()) throw Error("campaign config needs a non-empty models list");
    const Network net = cfg.network_path.empty() ? generate_campus_like(cfg.seed)
                                                 : load_network(cfg.network_path);
    const DayProfile profiles =
        cfg.profiles_path.empty() ? default_workday_profile() : load_profile(cfg.profiles_path);
    if (profiles.steps() < cfg.horizon) throw Error("profiles shorter than the horizon");

    std::vector<BranchPlan> plans;
    for (const std::string& raw : cfg.models) {
        BranchPlan plan;
        plan.name = canonical_model_name(raw);
        if (plan.name == "ac") plan.is_ac = true;
        else plan.kind = model_kind_from_string(plan.name);
        plans.push_back(plan);
    }

    // linearization point: AC solution at the day's average prosumption
    double load_avg = 0.0, pv_avg = 0.0;
    for (std::size_t t = 0; t < cfg.horizon; ++t) {
        load_avg += profiles.load_pu[t];
        pv_avg += profiles.pv_pu[t];
    }
    load_avg /= double(cfg.horizon);
    pv_avg /= double(cfg.horizon);
    const PowerFlowState base = solve_ac(net, base_injections(net, load_avg, pv_avg));

    fs::create_directories(cfg.out_dir);
    std::vector<std::future<BranchResult>> jobs;
    for (const BranchPlan& plan : plans)
        jobs.push_back(std::async(std::launch::async, [&, plan] {
            return run_branch(plan, net, profiles, base, cfg);
        }));

    std::vector<std::pair<BranchPlan, BranchResult>> done;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        try {
            done.emplace_back(plans[i], jobs[i].get());
        } catch (const std::exception& e) {
            std::cerr << "model " << plans[i].name << " failed: " << e.what() << "\n";
        }
    }
    if (done.empty()) return 1;

    if (done.size() >= 2) {
        std::vector<CampaignOutcome> outcomes;
        for (const auto& [plan, res] : done)
            outcomes.push_back({plan.name, res.report, res.schedule.objective,
                                res.negative_losses});
        write_file(fs::path(cfg.out_dir) / "comparison.csv", comparison_report(outcomes));
    }

    std::vector<PlotSeries> ppcc, soc;
    for (const auto& [plan, res] : done) {
        ppcc.push_back({plan.name, hour_axis(res.schedule.p_pcc.size(), profiles.dt_hours, 0.0),
                        res.schedule.p_pcc});
        soc.push_back({plan.name,
                       hour_axis(res.report.soc_agg.size(), profiles.dt_hours, 0.0),
                       res.report.soc_agg});
    }
    write_file(fs::path(cfg.out_dir) / "fig_ppcc.svg",
               emit_svg(ppcc, "Scheduled PCC import", "hour", "P_pcc (p.u.)"));
    write_file(fs::path(cfg.out_dir) / "fig_soc.svg",
               emit_svg(soc, "Aggregate SOC after AC verification", "hour", "SOC (fraction)"));
    return 0;
}

}  // namespace gridflex
