#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include "gridflex/acpf.hpp"
#include "gridflex/verification.hpp"
#include "test_util.hpp"

using namespace gridflex;

namespace {

ScheduleResult lossless_plan(const Network& net, const DayProfile& profile, std::size_t T) {
    std::vector<LinearModel> steps;
    for (std::size_t t = 0; t < T; ++t)
        steps.push_back(
            build_dc(net, base_injections(net, profile.load_pu[t], profile.pv_pu[t])));
    const ScheduleProblem prob = make_schedule_problem(net, profile, T);
    const ScheduleResult res = schedule_full_linear(prob, steps);
    REQUIRE(res.status == ScheduleStatus::Optimal);
    return res;
}

DayProfile flat_profile(std::size_t T) {
    DayProfile p;
    p.load_pu.assign(T, 1.0);
    p.pv_pu.assign(T, 0.0);
    p.dt_hours = 1.0;
    return p;
}

}  // namespace

TEST_CASE("a superconducting feeder replays a lossless plan exactly") {
    Network net = testutil::three_bus();
    for (Branch& br : net.branches) br.r = 0.0;
    const std::size_t T = 4;
    DayProfile profile;
    profile.load_pu = {0.8, 1.0, 0.6, 0.9};
    profile.pv_pu = {0.0, 0.4, 1.0, 0.1};
    profile.dt_hours = 1.0;

    const ScheduleResult plan = lossless_plan(net, profile, T);
    const VerificationReport rep = verify_schedule(net, plan, profile);

    CHECK(rep.violations.empty());
    for (std::size_t t = 0; t < T; ++t) {
        CHECK(std::abs(rep.realized_losses[t]) < 1e-9);
        CHECK(std::abs(rep.model_losses[t]) < 1e-9);
        CHECK(std::abs(rep.loss_error[t]) < 1e-9);
        CHECK(rep.p_pcc[t] == doctest::Approx(plan.p_pcc[t]).scale(1.0).epsilon(1e-10));
    }
    CHECK(std::abs(rep.cumulative_loss_error[T - 1]) < 1e-8);
    // stored energy follows the plan when nothing leaks
    for (std::size_t t = 0; t < T; ++t)
        CHECK(rep.soc_agg[t + 1] ==
              doctest::Approx(plan.e_agg[t] / 0.4).scale(1.0).epsilon(1e-6));
    CHECK(rep.soc_agg[0] == doctest::Approx(0.5));
}

TEST_CASE("losses drain the fleet when a lossless plan meets a resistive feeder") {
    const Network net = testutil::three_bus();
    const std::size_t T = 6;
    DayProfile profile = default_workday_profile();
    profile.load_pu.resize(T);
    profile.pv_pu.resize(T);

    const ScheduleResult plan = lossless_plan(net, profile, T);
    const VerificationReport rep = verify_schedule(net, plan, profile);

    // every step realizes more loss than the lossless model admits
    for (std::size_t t = 0; t < T; ++t) {
        CHECK(rep.realized_losses[t] > 0.0);
        CHECK(rep.loss_error[t] > 0.0);
    }
    // so the cumulative error climbs and the fleet lands short of target
    for (std::size_t t = 1; t < T; ++t)
        CHECK(rep.cumulative_loss_error[t] >= rep.cumulative_loss_error[t - 1]);
    const double final_soc = rep.soc_agg[T];
    CHECK(final_soc < rep.final_soc_target);
    // the shortfall in stored energy is exactly the accumulated loss error
    CHECK((rep.final_soc_target - final_soc) * 0.4 ==
          doctest::Approx(rep.cumulative_loss_error[T - 1]).scale(1.0).epsilon(1e-6));
    // which the report flags as a final soc miss
    REQUIRE_FALSE(rep.violations.empty());
    bool miss = false;
    for (const Violation& v : rep.violations)
        if (v.kind == ViolationKind::FinalSocMiss && v.step == T - 1) miss = true;
    CHECK(miss);
}

TEST_CASE("the bundled feeder replays a full day without losing the ac solve") {
    // Regression: the balance root-finder once opened its bracket at a fixed
    // 1 p.u., which collapsed the AC solve on this feeder (total load 0.37,
    // fleet 0.1). The probe span has to follow the operating point's scale.
    const Network net = load_network(testutil::data_path("networks/feeder33.json"));
    const DayProfile profile = default_workday_profile();
    const std::size_t T = profile.steps();

    const ScheduleResult plan = lossless_plan(net, profile, T);
    const VerificationReport rep = verify_schedule(net, plan, profile);

    for (std::size_t t = 0; t < T; ++t) CHECK(rep.loss_error[t] > 0.0);
    CHECK(rep.cumulative_loss_error[T - 1] > 0.0);
    CHECK(rep.soc_agg[T] < rep.final_soc_target);
}

TEST_CASE("each verified step balances the ac power flow") {
    const Network net = testutil::three_bus();
    const std::size_t T = 4;
    DayProfile profile = default_workday_profile();
    profile.load_pu.resize(T);
    profile.pv_pu.resize(T);

    const ScheduleResult plan = lossless_plan(net, profile, T);
    const VerificationReport rep = verify_schedule(net, plan, profile);

    for (std::size_t t = 0; t < T; ++t) {
        // P_pcc + pv - load - storage charge - losses must close to zero
        BusInjections inj = base_injections(net, profile.load_pu[t], profile.pv_pu[t]);
        double net_load = 0.0;
        for (std::size_t i = 0; i < net.size(); ++i)
            if (i != net.slack()) net_load -= inj.p[i];
        const double charge =
            (rep.soc_agg[t + 1] - rep.soc_agg[t]) * 0.4 / profile.dt_hours;
        CHECK(rep.p_pcc[t] - net_load - charge - rep.realized_losses[t] ==
              doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
    }
}

TEST_CASE("an overdrawn plan is flagged instead of clipped") {
    const Network net = testutil::three_bus();  // 0.4 p.u. h at 50%: 0.2 stored
    const std::size_t T = 2;
    const DayProfile profile = flat_profile(T);

    ScheduleResult plan;
    plan.p_pcc = {0.2, 0.2};  // far below the 0.5 load: the fleet must discharge
    plan.e_agg = {0.0, 0.0};
    const VerificationReport rep = verify_schedule(net, plan, profile);

    bool below = false;
    for (const Violation& v : rep.violations)
        if (v.kind == ViolationKind::SocBelowZero) below = true;
    CHECK(below);
    CHECK(rep.soc_agg[T] < 0.0);  // integration reports the raw trajectory
}

TEST_CASE("verification csv carries the pinned header and hour count") {
    const Network net = testutil::three_bus();
    const std::size_t T = 3;
    DayProfile profile = default_workday_profile();
    profile.load_pu.resize(T);
    profile.pv_pu.resize(T);
    const ScheduleResult plan = lossless_plan(net, profile, T);
    const VerificationReport rep = verify_schedule(net, plan, profile);

    const std::string csv = verification_to_csv(rep);
    std::istringstream in(csv);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header ==
          "hour,p_pcc,soc_agg,soc_unit_0,loss_realized,loss_model,loss_error,cum_loss_error");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == T);

    const LossErrorSeries series = loss_error_series(rep);
    REQUIRE(series.per_step.size() == T);
    for (std::size_t t = 0; t < T; ++t) {
        CHECK(series.per_step[t] == doctest::Approx(rep.loss_error[t]).scale(1.0).epsilon(1e-12));
        CHECK(series.cumulative[t] ==
              doctest::Approx(rep.cumulative_loss_error[t]).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("violations json lists misses with the closing balance") {
    const Network net = testutil::three_bus();
    const std::size_t T = 4;
    DayProfile profile = default_workday_profile();
    profile.load_pu.resize(T);
    profile.pv_pu.resize(T);
    const ScheduleResult plan = lossless_plan(net, profile, T);
    const VerificationReport rep = verify_schedule(net, plan, profile);

    const nlohmann::json j = nlohmann::json::parse(violations_to_json(rep));
    REQUIRE(j.contains("violations"));
    CHECK(j.at("final_soc_target") == doctest::Approx(0.5));
    CHECK(j.at("final_soc_agg") == doctest::Approx(rep.soc_agg[T]));
    CHECK(j.at("cumulative_loss_error") ==
          doctest::Approx(rep.cumulative_loss_error[T - 1]));
    bool miss = false;
    for (const auto& v : j.at("violations"))
        if (v.at("kind") == "final_soc_miss") miss = true;
    CHECK(miss);
}

TEST_CASE("comparison report needs at least two branches and names them") {
    const Network net = testutil::three_bus();
    const std::size_t T = 3;
    DayProfile profile = default_workday_profile();
    profile.load_pu.resize(T);
    profile.pv_pu.resize(T);
    const ScheduleResult plan = lossless_plan(net, profile, T);

    CampaignOutcome dc;
    dc.model = "dc";
    dc.report = verify_schedule(net, plan, profile);
    dc.objective = plan.objective;
    dc.negative_losses = -1;
    CHECK_THROWS_AS(comparison_report({dc}), Error);

    CampaignOutcome enh = dc;
    enh.model = "lin_ac";
    enh.negative_losses = 0;
    CampaignOutcome ac = dc;
    ac.model = "ac";

    const std::string csv = comparison_report({dc, enh, ac});
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line ==
          "model,topology,voltage_magnitude,voltage_angle,reactive_power,line_loss,"
          "negative_losses,final_soc_agg,final_soc_miss,cumulative_loss_error,objective");
    REQUIRE(std::getline(in, line));
    CHECK(line.rfind("dc,meshed,standard,-,-,-,not applicable (lossless),", 0) == 0);
    REQUIRE(std::getline(in, line));
    CHECK(line.rfind("lin_ac,meshed,standard,standard,standard,linearized,false,", 0) == 0);
    REQUIRE(std::getline(in, line));
    CHECK(line.rfind("ac,meshed,standard,standard,standard,exact,not applicable (exact),", 0) ==
          0);
}
