"""End-to-end smoke tests for the python bindings."""

from pathlib import Path

import pytest

import gridflex as gf

DATA = Path(__file__).resolve().parents[2] / "data"


def test_load_feeder_and_solve():
    net = gf.load_network(str(DATA / "networks" / "feeder33.json"))
    assert net.size() == 33
    assert gf.check_radial(net)

    inj = gf.base_injections(net, 1.0, 0.5)
    state = gf.solve_ac(net, inj)
    assert state.residual_norm < 1e-10
    assert 0 < state.iterations < 20
    assert state.v[net.slack()] == pytest.approx(1.0)
    assert min(state.v) > 0.85
    assert gf.total_losses(state, net) > 0


def test_errors_surface_as_exceptions():
    with pytest.raises(gf.GridflexError):
        gf.load_network("/no/such/network.json")
    with pytest.raises(RuntimeError):
        gf.network_from_json("{}")


def test_campus_distflow_matches_ac():
    net = gf.generate_campus_like(seed=1)
    assert gf.check_radial(net)
    assert net.storage and net.pv

    inj = gf.base_injections(net, 0.9, 0.4)
    ac = gf.solve_ac(net, inj)
    df = gf.solve_distflow(net, inj)
    gap = max(abs(u - v * v) for u, v in zip(df.u, ac.v))
    assert gap < 1e-6


def test_profile_round_trip(tmp_path):
    prof = gf.default_workday_profile()
    assert prof.steps() == 24

    path = tmp_path / "day.csv"
    gf.save_profile(prof, str(path))
    again = gf.load_profile(str(path))
    assert again.load_pu == pytest.approx(prof.load_pu)
    assert again.pv_pu == pytest.approx(prof.pv_pu)


def test_network_json_round_trip(tmp_path):
    net = gf.generate_campus_like(seed=3)
    path = tmp_path / "net.json"
    gf.save_network(net, str(path))
    again = gf.load_network(str(path))
    assert again.size() == net.size()
    assert again.to_json() == net.to_json()


def test_step_model_columns_and_features():
    net = gf.generate_campus_like(seed=1)
    inj = gf.base_injections(net, 1.0, 0.5)
    base = gf.solve_ac(net, inj)

    model = gf.build_step_model("lin_ac", net, inj, base=base)
    assert model.kind == "lin_ac"
    assert model.nx == 2
    names = set(model.column_names)
    assert {"P_pcc", "C_agg"} <= names

    lossless = gf.build_step_model("dc", net, inj)
    assert lossless.kind == "dc"
    assert gf.model_feature_row("dc") == ["meshed", "standard", "-", "-", "-"]


def test_envelope_schedule_hits_final_energy():
    net = gf.generate_campus_like(seed=1)
    prof = gf.default_workday_profile()
    inj = gf.base_injections(net, 1.0, 0.5)
    base = gf.solve_ac(net, inj)

    env = gf.build_envelope(net, "lin_ac", prof, horizon=24, directions=32, base=base)
    assert env.dims() == 48
    assert env.contains(env.feasible_point)

    prob = gf.make_schedule_problem(net, prof, horizon=24)
    res = gf.schedule_over_envelope(prob, env)
    assert res.status == "optimal"
    assert len(res.p_pcc) == 24
    cap = net.storage_energy_capacity()
    assert res.e_agg[-1] == pytest.approx(0.5 * cap, abs=1e-6)


def test_verification_reports_accumulating_loss_error():
    net = gf.generate_campus_like(seed=1)
    prof = gf.default_workday_profile()
    prob = gf.make_schedule_problem(net, prof, horizon=24)

    models = [
        gf.build_step_model("dc", net, gf.base_injections(net, prof.load_pu[t], prof.pv_pu[t]))
        for t in range(24)
    ]
    plan = gf.schedule_full_linear(prob, models)
    assert plan.status == "optimal"

    report = gf.verify_schedule(net, plan, prob.profiles)
    assert len(report.soc_agg) == 25
    assert report.cumulative_loss_error[-1] > 0
    assert report.soc_agg[-1] < report.final_soc_target
    assert any(v.kind == "final_soc_miss" for v in report.violations)
    assert "cum_loss_error" in report.to_csv().splitlines()[0]


def test_campaign_writes_artifacts(tmp_path):
    cfg = gf.CampaignConfig()
    cfg.models = ["dc", "ac"]
    cfg.horizon = 8
    cfg.directions = 16
    cfg.out_dir = str(tmp_path / "out")

    assert gf.run_campaign(cfg) == 0
    out = tmp_path / "out"
    assert (out / "dc" / "schedule.csv").is_file()
    assert (out / "dc" / "envelope.json").is_file()
    assert (out / "ac" / "verification.csv").is_file()
    assert (out / "comparison.csv").is_file()
    assert (out / "fig_ppcc.svg").is_file()
    assert (out / "fig_soc.svg").is_file()

    plan = gf.schedule_from_csv((out / "dc" / "schedule.csv").read_text())
    assert len(plan.p_pcc) == 8
